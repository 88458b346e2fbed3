// SPDX-License-Identifier: Apache-2.0

#include "hierprec/wmmse.hpp"

#include <cmath>
#include <string>

#include "hierprec/errors.hpp"
#include "hierprec/power.hpp"

namespace hierprec {

void SolverOptions::validate() const {
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
}

std::vector<CMatrix> averaged_mse(const NetworkConfig& cfg, const CMatrix& h_est, const CMatrix& t,
                                  const RxFilterBank& g, const RMatrix& sigma2) {
  if (static_cast<int>(g.blocks.size()) != cfg.num_pairs()) throw ShapeError("one receive filter per user required");
  const RVector phi = phi_diagonal(sigma2, t);
  std::vector<CMatrix> out;
  out.reserve(g.blocks.size());
  for (int k = 0; k < cfg.num_pairs(); ++k) {
    const RVector phi_k = phi.segment(cfg.rx_offset(k), cfg.rx_antennas(k));
    out.push_back(mse_matrix(cfg, h_est, t, g.blocks[static_cast<std::size_t>(k)], k, phi_k));
  }
  return out;
}

double objective(const NetworkConfig& cfg, const CMatrix& h_est, const CMatrix& t, const RxFilterBank& g,
                 const WeightBank& omega, const RMatrix& sigma2) {
  if (static_cast<int>(omega.blocks.size()) != cfg.num_pairs()) throw ShapeError("one weight per user required");
  const auto mbar = averaged_mse(cfg, h_est, t, g, sigma2);
  double acc = 0.0;
  for (std::size_t k = 0; k < mbar.size(); ++k) {
    const CMatrix& w = omega.blocks[k];
    if (w.rows() != mbar[k].rows() || w.cols() != mbar[k].cols()) throw ShapeError("Omega_k must be d_k x d_k");
    acc += (w * mbar[k]).trace().real() - log_det_hpd(w);
  }
  return acc;
}

RxFilterBank update_filters(const NetworkConfig& cfg, const CMatrix& h_est, const CMatrix& t, const RMatrix& sigma2) {
  const RVector phi = phi_diagonal(sigma2, t);
  RxFilterBank g;
  g.blocks.reserve(static_cast<std::size_t>(cfg.num_pairs()));
  for (int k = 0; k < cfg.num_pairs(); ++k) {
    const RVector phi_k = phi.segment(cfg.rx_offset(k), cfg.rx_antennas(k));
    g.blocks.push_back(mmse_rx_filter(cfg, h_est, t, k, phi_k));
  }
  return g;
}

WeightBank update_weights(std::span<const CMatrix> mse_bar) {
  WeightBank w;
  w.blocks.reserve(mse_bar.size());
  for (const auto& m : mse_bar) w.blocks.push_back(inverse_hpd(m));
  return w;
}

CMatrix precoder_for_lambda(const CMatrix& h_est, const CMatrix& g_aggregate, const CMatrix& omega_aggregate,
                            const RVector& psi, double lambda) {
  if (psi.size() != h_est.rows()) throw ShapeError("psi must have M_tot entries");
  const CMatrix hg = h_est * g_aggregate;  // M_tot x d_tot
  const CMatrix rhs = hg * omega_aggregate;
  CMatrix a = rhs * hg.adjoint();
  a.diagonal() += (psi.array() + lambda).matrix().cast<cplx>();
  return solve_hpsd(a, rhs);
}

PrecoderUpdate update_precoder(const CMatrix& h_est, const CMatrix& g_aggregate, const CMatrix& omega_aggregate,
                               const RVector& psi, double total_power) {
  if (!(total_power > 0.0)) throw ConfigError("total power must be positive");
  PrecoderUpdate out;
  out.lambda = (omega_aggregate * g_aggregate.adjoint() * g_aggregate).trace().real() / total_power;
  out.t = precoder_for_lambda(h_est, g_aggregate, omega_aggregate, psi, out.lambda);
  const double p = out.t.squaredNorm();
  if (p > total_power * (1.0 + 1e-9)) {
    out.t *= std::sqrt(total_power / p);
    out.clipped = true;
  }
  return out;
}

CMatrix matched_filter_precoder(const NetworkConfig& cfg, const CMatrix& h_est, double total_power) {
  CMatrix t = CMatrix::Zero(cfg.total_tx_antennas(), cfg.total_streams());
  for (int k = 0; k < cfg.num_pairs(); ++k) {
    // First d_k columns of H_k; d_k <= N_k is a config invariant.
    t.middleCols(cfg.stream_offset(k), cfg.streams(k)) =
        h_est.middleCols(cfg.rx_offset(k), cfg.streams(k));
  }
  const double p = t.squaredNorm();
  if (p > 0.0) t *= std::sqrt(total_power / p);
  return t;
}

SolverState robust_wmmse(const NetworkConfig& cfg, const CMatrix& h_est, const RMatrix& sigma2,
                         const SolverOptions& opts, const std::optional<CMatrix>& t_init) {
  opts.validate();
  if (h_est.rows() != cfg.total_tx_antennas() || h_est.cols() != cfg.total_rx_antennas()) {
    throw ShapeError("robust_wmmse: channel estimate must be M_tot x N_tot");
  }
  if (sigma2.rows() != h_est.rows() || sigma2.cols() != h_est.cols()) {
    throw ShapeError("robust_wmmse: sigma^2 table must match the channel shape");
  }
  const double p_tot = cfg.total_power();

  SolverState s;
  if (opts.init == InitMode::provided || t_init.has_value()) {
    if (!t_init) throw ConfigError("robust_wmmse: initial precoder required");
    if (t_init->rows() != cfg.total_tx_antennas() || t_init->cols() != cfg.total_streams()) {
      throw ShapeError("robust_wmmse: initial precoder must be M_tot x d_tot");
    }
    if (t_init->squaredNorm() > p_tot * (1.0 + 1e-9)) throw ConfigError("initial precoder exceeds the sum budget");
    s.t = *t_init;
  } else {
    s.t = matched_filter_precoder(cfg, h_est, p_tot);
  }
  if (opts.per_tx_normalize_each_round) s.t = per_tx_normalize(cfg, s.t).t;

  s.g = update_filters(cfg, h_est, s.t, sigma2);
  s.omega = update_weights(averaged_mse(cfg, h_est, s.t, s.g, sigma2));
  double prev = objective(cfg, h_est, s.t, s.g, s.omega, sigma2);
  s.objective_trace.push_back(prev);

  for (int it = 0; it < opts.max_iterations; ++it) {
    const CMatrix g_agg = s.g.aggregate();
    const CMatrix w_agg = s.omega.aggregate();
    s.psi = psi_diagonal(sigma2, g_agg, w_agg);
    const PrecoderUpdate upd = update_precoder(h_est, g_agg, w_agg, s.psi, p_tot);
    s.lambda = upd.lambda;

    // Joint step over (T, receiver scale): T = beta * T~ at full sum power,
    // G <- G / beta. The next MMSE update absorbs the receiver scale.
    const double pw = upd.t.squaredNorm();
    if (pw > 0.0) {
      s.beta = std::sqrt(p_tot / pw);
      s.t = s.beta * upd.t;
    } else {
      s.beta = 1.0;
      s.t = upd.t;
    }
    if (opts.per_tx_normalize_each_round) s.t = per_tx_normalize(cfg, s.t).t;
    if (!all_finite(s.t)) throw NumericalError("robust_wmmse: non-finite precoder");

    s.g = update_filters(cfg, h_est, s.t, sigma2);
    s.omega = update_weights(averaged_mse(cfg, h_est, s.t, s.g, sigma2));
    const double obj = objective(cfg, h_est, s.t, s.g, s.omega, sigma2);
    s.objective_trace.push_back(obj);
    s.iterations = it + 1;
    if (std::abs(prev - obj) <= opts.tolerance * std::max(std::abs(prev), 1e-300)) {
      s.converged = true;
      break;
    }
    prev = obj;
  }
  s.phi = phi_diagonal(sigma2, s.t);
  s.psi = psi_diagonal(sigma2, s.g.aggregate(), s.omega.aggregate());
  return s;
}

SolverState wmmse(const NetworkConfig& cfg, const CMatrix& h, const SolverOptions& opts,
                  const std::optional<CMatrix>& t_init) {
  return robust_wmmse(cfg, h, RMatrix::Zero(h.rows(), h.cols()), opts, t_init);
}

}  // namespace hierprec
