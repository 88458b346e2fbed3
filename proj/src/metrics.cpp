// SPDX-License-Identifier: Apache-2.0

#include "hierprec/metrics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hierprec/errors.hpp"

namespace hierprec {

namespace {

void check_precoder(const NetworkConfig& cfg, const CMatrix& h, const CMatrix& t) {
  if (h.rows() != cfg.total_tx_antennas() || h.cols() != cfg.total_rx_antennas()) {
    throw ShapeError("channel must be M_tot x N_tot");
  }
  if (t.rows() != cfg.total_tx_antennas() || t.cols() != cfg.total_streams()) {
    throw ShapeError("precoder must be M_tot x d_tot");
  }
}

// H_k^H T (N_k x d_tot)
CMatrix effective_channel(const NetworkConfig& cfg, const CMatrix& h, const CMatrix& t, int k) {
  return h.middleCols(cfg.rx_offset(k), cfg.rx_antennas(k)).adjoint() * t;
}

CMatrix receive_covariance(const CMatrix& eff, const RVector* phi_k) {
  CMatrix cov = eff * eff.adjoint();
  cov.diagonal().array() += 1.0;
  if (phi_k != nullptr) cov.diagonal() += phi_k->cast<cplx>();
  return hermitian_part(cov);
}

CMatrix mse_impl(const NetworkConfig& cfg, const CMatrix& h, const CMatrix& t, const CMatrix& g_k, int k,
                 const RVector* phi_k) {
  check_precoder(cfg, h, t);
  const int nk = cfg.rx_antennas(k);
  const int dk = cfg.streams(k);
  if (g_k.rows() != nk || g_k.cols() != dk) throw ShapeError("G_k must be N_k x d_k");
  if (phi_k != nullptr && phi_k->size() != nk) throw ShapeError("Phi_k must have N_k entries");

  const CMatrix eff = effective_channel(cfg, h, t, k);
  const CMatrix cross = g_k.adjoint() * eff.middleCols(cfg.stream_offset(k), dk);  // G_k^H H_k^H T_k
  const CMatrix ge = g_k.adjoint() * eff;
  CMatrix m = CMatrix::Identity(dk, dk) + g_k.adjoint() * g_k + ge * ge.adjoint() - cross - cross.adjoint();
  if (phi_k != nullptr) m += g_k.adjoint() * phi_k->cast<cplx>().asDiagonal() * g_k;
  return hermitian_part(m);
}

CMatrix mmse_impl(const NetworkConfig& cfg, const CMatrix& h, const CMatrix& t, int k, const RVector* phi_k) {
  check_precoder(cfg, h, t);
  if (phi_k != nullptr && phi_k->size() != cfg.rx_antennas(k)) throw ShapeError("Phi_k must have N_k entries");
  const CMatrix eff = effective_channel(cfg, h, t, k);
  const CMatrix cov = receive_covariance(eff, phi_k);
  Eigen::LLT<CMatrix> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("receive covariance is not positive definite");
  return llt.solve(eff.middleCols(cfg.stream_offset(k), cfg.streams(k)));
}

}  // namespace

RVector phi_diagonal(const RMatrix& sigma2, const CMatrix& t) {
  if (sigma2.rows() != t.rows()) throw ShapeError("phi: sigma^2 rows must equal M_tot");
  return sigma2.transpose() * row_norms2(t);
}

RVector phi_matrix(const NetworkConfig& cfg, const RMatrix& sigma2, const CMatrix& t, int k) {
  if (sigma2.cols() != cfg.total_rx_antennas()) throw ShapeError("phi: sigma^2 columns must equal N_tot");
  return phi_diagonal(sigma2, t).segment(cfg.rx_offset(k), cfg.rx_antennas(k));
}

RVector psi_diagonal(const RMatrix& sigma2, const CMatrix& g_aggregate) {
  if (sigma2.cols() != g_aggregate.rows()) throw ShapeError("psi: sigma^2 columns must equal N_tot");
  return sigma2 * row_norms2(g_aggregate);
}

RVector psi_diagonal(const RMatrix& sigma2, const CMatrix& g_aggregate, const CMatrix& omega_aggregate) {
  if (sigma2.cols() != g_aggregate.rows()) throw ShapeError("psi: sigma^2 columns must equal N_tot");
  if (omega_aggregate.rows() != g_aggregate.cols() || omega_aggregate.cols() != g_aggregate.cols()) {
    throw ShapeError("psi: weight must be d_tot x d_tot");
  }
  // diag(G W G^H) with W Hermitian is real.
  const CMatrix gw = g_aggregate * omega_aggregate;
  RVector d(g_aggregate.rows());
  for (Eigen::Index q = 0; q < d.size(); ++q) d(q) = gw.row(q).dot(g_aggregate.row(q)).real();
  return sigma2 * d;
}

CMatrix mse_matrix(const NetworkConfig& cfg, const CMatrix& h, const CMatrix& t, const CMatrix& g_k, int k) {
  return mse_impl(cfg, h, t, g_k, k, nullptr);
}

CMatrix mse_matrix(const NetworkConfig& cfg, const CMatrix& h, const CMatrix& t, const CMatrix& g_k, int k,
                   const RVector& phi_k) {
  return mse_impl(cfg, h, t, g_k, k, &phi_k);
}

CMatrix mmse_rx_filter(const NetworkConfig& cfg, const CMatrix& h, const CMatrix& t, int k) {
  return mmse_impl(cfg, h, t, k, nullptr);
}

CMatrix mmse_rx_filter(const NetworkConfig& cfg, const CMatrix& h, const CMatrix& t, int k, const RVector& phi_k) {
  return mmse_impl(cfg, h, t, k, &phi_k);
}

std::vector<double> tx_block_powers(const NetworkConfig& cfg, const CMatrix& t) {
  std::vector<double> p(static_cast<std::size_t>(cfg.num_pairs()));
  for (int j = 0; j < cfg.num_pairs(); ++j) {
    p[static_cast<std::size_t>(j)] = t.middleRows(cfg.tx_offset(j), cfg.tx_antennas(j)).squaredNorm();
  }
  return p;
}

RateReport evaluate_rates(const NetworkConfig& cfg, const ChannelRealization& channel, const CMatrix& t,
                          double power_slack) {
  const CMatrix& h = channel.matrix();
  check_precoder(cfg, h, t);
  const auto powers = tx_block_powers(cfg, t);
  for (int j = 0; j < cfg.num_pairs(); ++j) {
    if (powers[static_cast<std::size_t>(j)] > cfg.power(j) * (1.0 + power_slack)) {
      throw PowerViolation("TX " + std::to_string(j + 1) + " uses power " +
                           std::to_string(powers[static_cast<std::size_t>(j)]) + " above its budget " +
                           std::to_string(cfg.power(j)));
    }
  }
  RateReport report;
  report.per_user.reserve(static_cast<std::size_t>(cfg.num_pairs()));
  for (int k = 0; k < cfg.num_pairs(); ++k) {
    const CMatrix g = mmse_impl(cfg, h, t, k, nullptr);
    const CMatrix m = mse_impl(cfg, h, t, g, k, nullptr);
    // At the MMSE filter 0 < det M_k <= 1; clamp rounding below zero.
    const double r = std::max(0.0, -log_det_hpd(m) / std::numbers::ln2);
    report.per_user.push_back(r);
    report.sum += r;
  }
  return report;
}

}  // namespace hierprec
