// SPDX-License-Identifier: Apache-2.0

#include "hierprec/hierarchy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "hierprec/errors.hpp"
#include "hierprec/metrics.hpp"

namespace hierprec {

namespace {

constexpr std::array<SchemeId, 4> kSchemes = {SchemeId::perfect_csit, SchemeId::naive_distributed,
                                              SchemeId::hier_bisection, SchemeId::hier_clipping};

// Pieces of the free-block system B X = C, B = H_O G W G^H H_O^H + Psi_O.
struct FreeBlockSystem {
  CMatrix gram;  // without lambda
  CMatrix rhs;
};

FreeBlockSystem free_block_system(const CMatrix& h_est, const CMatrix& g_aggregate, const CMatrix& omega_aggregate,
                                  const RVector& psi, const CMatrix& w_in, bool include_psi) {
  const Eigen::Index m_in = w_in.rows();
  const Eigen::Index m_opt = h_est.rows() - m_in;
  if (m_opt <= 0) throw ShapeError("update_w_opt: no free rows");
  if (w_in.rows() > 0 && w_in.cols() != g_aggregate.cols()) throw ShapeError("update_w_opt: W_In must be M_In x d_tot");
  if (psi.size() != h_est.rows()) throw ShapeError("update_w_opt: psi must have M_tot entries");

  const CMatrix hg = h_est * g_aggregate;
  const auto hg_in = hg.topRows(m_in);
  const auto hg_opt = hg.bottomRows(m_opt);
  const Eigen::Index d_tot = g_aggregate.cols();

  CMatrix residual = CMatrix::Identity(d_tot, d_tot);
  if (m_in > 0) residual -= hg_in.adjoint() * w_in;

  FreeBlockSystem sys;
  const CMatrix hgw = hg_opt * omega_aggregate;
  sys.rhs = hgw * residual;
  sys.gram = hermitian_part(hgw * hg_opt.adjoint());
  if (include_psi) sys.gram.diagonal() += psi.tail(m_opt).cast<cplx>();
  return sys;
}

// ||X(lambda)||^2 with X(lambda) = (B + lambda I)^{-1} C in B's eigenbasis.
// Components on the numerical null space of B are dropped at lambda = 0,
// matching the minimum-norm solve.
struct SpectralPower {
  RVector eigenvalues;
  RVector weights;  // ||u_i^H C||^2
  CMatrix basis;
  CMatrix projected;
  double cutoff = 0.0;

  explicit SpectralPower(const FreeBlockSystem& sys) {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(sys.gram);
    eigenvalues = eig.eigenvalues();
    basis = eig.eigenvectors();
    projected = basis.adjoint() * sys.rhs;
    weights = projected.rowwise().squaredNorm();
    const double scale = eigenvalues.size() > 0 ? std::max(std::abs(eigenvalues(eigenvalues.size() - 1)), 1.0) : 1.0;
    cutoff = scale * 1e-12 * static_cast<double>(std::max<Eigen::Index>(eigenvalues.size(), 1));
  }

  double power(double lambda) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
      const double den = lambda > 0.0 ? eigenvalues(i) + lambda : eigenvalues(i);
      if (lambda <= 0.0 && den <= cutoff) continue;
      acc += weights(i) / (den * den);
    }
    return acc;
  }

  CMatrix solution(double lambda) const {
    CMatrix scaled = projected;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
      const double den = lambda > 0.0 ? eigenvalues(i) + lambda : eigenvalues(i);
      if (lambda <= 0.0 && den <= cutoff) {
        scaled.row(i).setZero();
      } else {
        scaled.row(i) /= den;
      }
    }
    return basis * scaled;
  }
};

}  // namespace

std::string_view scheme_name(SchemeId id) {
  switch (id) {
    case SchemeId::perfect_csit: return "perfect";
    case SchemeId::naive_distributed: return "naive";
    case SchemeId::hier_bisection: return "hier-bisect";
    case SchemeId::hier_clipping: return "hier-clip";
  }
  return "unknown";
}

SchemeId parse_scheme(std::string_view name) {
  if (name == "perfect" || name == "perfect_csit") return SchemeId::perfect_csit;
  if (name == "naive" || name == "naive_distributed") return SchemeId::naive_distributed;
  if (name == "hier-bisect" || name == "hier_bisection") return SchemeId::hier_bisection;
  if (name == "hier-clip" || name == "hier_clipping") return SchemeId::hier_clipping;
  throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

std::span<const SchemeId> all_schemes() { return kSchemes; }

PrecoderPartition PrecoderPartition::split(const NetworkConfig& cfg, const CMatrix& t, int pivot) {
  if (pivot < 0 || pivot >= cfg.num_pairs()) throw std::out_of_range("PrecoderPartition: pivot out of range");
  if (t.rows() != cfg.total_tx_antennas()) throw ShapeError("PrecoderPartition: precoder must have M_tot rows");
  const int m_in = cfg.tx_offset(pivot);
  return PrecoderPartition{pivot, t.topRows(m_in), t.bottomRows(t.rows() - m_in)};
}

CMatrix PrecoderPartition::stack() const {
  CMatrix t(w_in.rows() + w_opt.rows(), w_opt.cols());
  t.topRows(w_in.rows()) = w_in;
  t.bottomRows(w_opt.rows()) = w_opt;
  return t;
}

CMatrix update_w_opt(const CMatrix& h_est, const CMatrix& g_aggregate, const CMatrix& omega_aggregate,
                     const RVector& psi, const CMatrix& w_in, double lambda, bool include_psi) {
  if (lambda < 0.0) throw std::invalid_argument("update_w_opt: lambda must be non-negative");
  FreeBlockSystem sys = free_block_system(h_est, g_aggregate, omega_aggregate, psi, w_in, include_psi);
  sys.gram.diagonal().array() += lambda;
  return solve_hpsd(sys.gram, sys.rhs);
}

BisectionResult solve_lambda_bisection(const CMatrix& h_est, const CMatrix& g_aggregate,
                                       const CMatrix& omega_aggregate, const RVector& psi, const CMatrix& w_in,
                                       double power_budget, const HierarchyOptions& opts) {
  const FreeBlockSystem sys =
      free_block_system(h_est, g_aggregate, omega_aggregate, psi, w_in, opts.psi_in_fixed_block);
  BisectionResult out;
  if (!(power_budget > 0.0)) {
    out.w_opt = CMatrix::Zero(sys.rhs.rows(), sys.rhs.cols());
    out.flagged = true;
    return out;
  }
  const SpectralPower sp(sys);
  if (sp.power(0.0) <= power_budget) {
    out.w_opt = sp.solution(0.0);
    return out;
  }
  // ||X(lambda)||^2 <= ||C||^2 / lambda^2, so this bracket end is feasible.
  double hi = std::max(sys.rhs.norm() / std::sqrt(power_budget), 1e-300);
  while (sp.power(hi) > power_budget) hi *= 2.0;
  double lo = 0.0;
  double lambda = hi;
  for (int it = 0; it < opts.bisection_max_iterations; ++it) {
    out.iterations = it + 1;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double p = sp.power(mid);
    if (p > power_budget) {
      lo = mid;
    } else {
      hi = mid;
    }
    lambda = hi;
    if (std::abs(sp.power(hi) - power_budget) <= opts.bisection_tolerance * power_budget) break;
  }
  out.lambda = lambda;
  out.w_opt = sp.solution(lambda);
  return out;
}

StageResult fixed_block_wmmse(const NetworkConfig& cfg, const CMatrix& h_est, const RMatrix& sigma2,
                              const CMatrix& w_in, FreeBlockRule rule, const HierarchyOptions& opts,
                              const std::optional<CMatrix>& t_init) {
  const SolverOptions& so = opts.solver;
  so.validate();
  const int m_in = static_cast<int>(w_in.rows());
  int pivot = -1;
  for (int j = 0; j < cfg.num_pairs(); ++j) {
    if (cfg.tx_offset(j) == m_in) pivot = j;
  }
  if (pivot < 0) throw ShapeError("fixed_block_wmmse: W_In must cover whole TX blocks and leave free rows");
  if (m_in > 0 && w_in.cols() != cfg.total_streams()) throw ShapeError("fixed_block_wmmse: W_In must be M_In x d_tot");

  const double p_tot = cfg.total_power();
  const double budget = p_tot - w_in.squaredNorm();
  const int m_opt = cfg.total_tx_antennas() - m_in;

  StageResult out;
  SolverState& s = out.state;
  s.t = CMatrix::Zero(cfg.total_tx_antennas(), cfg.total_streams());
  if (m_in > 0) s.t.topRows(m_in) = w_in;
  if (!(budget > 0.0)) {
    out.flagged = true;
  } else {
    CMatrix init;
    if (t_init) {
      if (t_init->rows() != s.t.rows() || t_init->cols() != s.t.cols()) {
        throw ShapeError("fixed_block_wmmse: initial precoder must be M_tot x d_tot");
      }
      init = t_init->bottomRows(m_opt);
      const double p = init.squaredNorm();
      if (p > budget) init *= std::sqrt(budget / p);
    } else {
      init = matched_filter_precoder(cfg, h_est, p_tot).bottomRows(m_opt);
      const double p = init.squaredNorm();
      if (p > 0.0) init *= std::sqrt(budget / p);
    }
    s.t.bottomRows(m_opt) = init;
  }
  if (opts.stage_normalize_each_round) s.t = per_tx_normalize_free(cfg, s.t, pivot).t;

  s.g = update_filters(cfg, h_est, s.t, sigma2);
  s.omega = update_weights(averaged_mse(cfg, h_est, s.t, s.g, sigma2));
  double prev = objective(cfg, h_est, s.t, s.g, s.omega, sigma2);
  s.objective_trace.push_back(prev);

  for (int it = 0; it < so.max_iterations && !out.flagged; ++it) {
    const CMatrix g_agg = s.g.aggregate();
    const CMatrix w_agg = s.omega.aggregate();
    s.psi = psi_diagonal(sigma2, g_agg, w_agg);
    CMatrix w_opt;
    if (rule == FreeBlockRule::bisection) {
      BisectionResult b = solve_lambda_bisection(h_est, g_agg, w_agg, s.psi, w_in, budget, opts);
      s.lambda = b.lambda;
      out.flagged = out.flagged || b.flagged;
      w_opt = std::move(b.w_opt);
    } else {
      s.lambda = 0.0;
      w_opt = clip_w_opt(update_w_opt(h_est, g_agg, w_agg, s.psi, w_in, 0.0, opts.psi_in_fixed_block), w_in, p_tot);
    }
    s.t.bottomRows(m_opt) = w_opt;
    if (opts.stage_normalize_each_round) s.t = per_tx_normalize_free(cfg, s.t, pivot).t;
    if (!all_finite(s.t)) throw NumericalError("fixed_block_wmmse: non-finite precoder");

    s.g = update_filters(cfg, h_est, s.t, sigma2);
    s.omega = update_weights(averaged_mse(cfg, h_est, s.t, s.g, sigma2));
    const double obj = objective(cfg, h_est, s.t, s.g, s.omega, sigma2);
    s.objective_trace.push_back(obj);
    s.iterations = it + 1;
    if (std::abs(prev - obj) <= so.tolerance * std::max(std::abs(prev), 1e-300)) {
      s.converged = true;
      break;
    }
    prev = obj;
  }
  s.phi = phi_diagonal(sigma2, s.t);
  s.psi = psi_diagonal(sigma2, s.g.aggregate(), s.omega.aggregate());
  return out;
}

EffectivePrecoder hierarchical_precode(const NetworkConfig& cfg, const CsiSet& csi, FreeBlockRule rule,
                                       const HierarchyOptions& opts) {
  if (csi.num_tx() != cfg.num_pairs()) throw ShapeError("hierarchical_precode: one estimate per TX required");
  EffectivePrecoder out;
  out.scheme = rule == FreeBlockRule::bisection ? SchemeId::hier_bisection : SchemeId::hier_clipping;
  out.t = CMatrix::Zero(cfg.total_tx_antennas(), cfg.total_streams());

  std::optional<CMatrix> previous;
  for (int j = 0; j < cfg.num_pairs(); ++j) {
    // Blocks 0..j-1 are the decisions TX j reproduces from view(j); carrying
    // them forward gives the same matrices.
    const CMatrix w_in = out.t.topRows(cfg.tx_offset(j));
    StageResult stage = fixed_block_wmmse(cfg, csi.estimate(j), csi.quality().sigma2(j), w_in, rule, opts,
                                          opts.warm_start_stages ? previous : std::nullopt);
    out.stage_iterations.push_back(stage.state.iterations);
    if (stage.flagged) {
      out.flagged = true;
      out.flag_reason = "non-positive remaining budget at TX " + std::to_string(j + 1);
    }
    const FreeNormalizeResult norm = per_tx_normalize_free(cfg, stage.state.t, j);
    if (norm.fixed_violation) {
      out.flagged = true;
      out.flag_reason = "fixed block over budget at TX " + std::to_string(j + 1);
    }
    out.t.middleRows(cfg.tx_offset(j), cfg.tx_antennas(j)) = norm.t.middleRows(cfg.tx_offset(j), cfg.tx_antennas(j));
    previous = norm.t;
  }
  return out;
}

EffectivePrecoder naive_distributed_precode(const NetworkConfig& cfg, const CsiSet& csi,
                                            const HierarchyOptions& opts) {
  if (csi.num_tx() != cfg.num_pairs()) throw ShapeError("naive_distributed_precode: one estimate per TX required");
  SolverOptions so = opts.solver;
  so.per_tx_normalize_each_round = opts.naive_normalize_each_round;
  EffectivePrecoder out;
  out.scheme = SchemeId::naive_distributed;
  out.t = CMatrix::Zero(cfg.total_tx_antennas(), cfg.total_streams());
  for (int j = 0; j < cfg.num_pairs(); ++j) {
    const SolverState s = robust_wmmse(cfg, csi.estimate(j), csi.quality().sigma2(j), so);
    out.stage_iterations.push_back(s.iterations);
    const CMatrix local = per_tx_normalize(cfg, s.t).t;
    out.t.middleRows(cfg.tx_offset(j), cfg.tx_antennas(j)) = local.middleRows(cfg.tx_offset(j), cfg.tx_antennas(j));
  }
  return out;
}

EffectivePrecoder perfect_csit_precode(const NetworkConfig& cfg, const ChannelRealization& channel,
                                       const HierarchyOptions& opts) {
  SolverOptions so = opts.solver;
  so.per_tx_normalize_each_round = opts.perfect_normalize_each_round;
  const SolverState s = wmmse(cfg, channel.matrix(), so);
  EffectivePrecoder out;
  out.scheme = SchemeId::perfect_csit;
  out.t = per_tx_normalize(cfg, s.t).t;
  out.stage_iterations.push_back(s.iterations);
  return out;
}

EffectivePrecoder precode(SchemeId scheme, const NetworkConfig& cfg, const ChannelRealization& channel,
                          const CsiSet& csi, const HierarchyOptions& opts) {
  switch (scheme) {
    case SchemeId::perfect_csit: return perfect_csit_precode(cfg, channel, opts);
    case SchemeId::naive_distributed: return naive_distributed_precode(cfg, csi, opts);
    case SchemeId::hier_bisection: return hierarchical_precode(cfg, csi, FreeBlockRule::bisection, opts);
    case SchemeId::hier_clipping: return hierarchical_precode(cfg, csi, FreeBlockRule::clipping, opts);
  }
  throw std::invalid_argument("precode: unknown scheme");
}

}  // namespace hierprec
