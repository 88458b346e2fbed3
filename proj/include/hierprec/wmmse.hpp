// SPDX-License-Identifier: Apache-2.0
//
// Centralized robust weighted-MMSE sum-rate maximization under a sum-power
// constraint. The robust variant replaces every MSE matrix by its average over
// the CSI error, M_k + G_k^H Phi_k G_k; with zero error variances it reduces
// to the classical algorithm.
//
// Objective (natural log):  sum_k tr(Omega_k Mbar_k) - ln det Omega_k.
// Updates per round: G (MMSE), Omega = Mbar^{-1}, T (closed form with the
// scaled-receiver multiplier lambda = tr(Omega G^H G) / P_tot).

#pragma once

#include <optional>
#include <vector>

#include "hierprec/linalg.hpp"
#include "hierprec/metrics.hpp"
#include "hierprec/model.hpp"

namespace hierprec {

enum class InitMode {
  matched_filter,  // T_k proportional to the user's own channel columns
  provided,        // caller passes T_init
};

struct SolverOptions {
  int max_iterations = 100;
  double tolerance = 1e-5;  // relative objective change
  // Scale the precoder to the per-TX budgets after every T update. Breaks the
  // descent guarantee.
  bool per_tx_normalize_each_round = false;
  InitMode init = InitMode::matched_filter;

  void validate() const;
};

struct SolverState {
  CMatrix t;
  RxFilterBank g;
  WeightBank omega;
  RVector phi;  // N_tot, for the current T
  RVector psi;  // M_tot, for the current G and Omega
  double lambda = 0.0;
  double beta = 1.0;
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
};

// sum_k tr(Omega_k Mbar_k) - ln det Omega_k. Throws NumericalError if an
// Omega_k is not positive definite.
double objective(const NetworkConfig& cfg, const CMatrix& h_est, const CMatrix& t, const RxFilterBank& g,
                 const WeightBank& omega, const RMatrix& sigma2);

// Mbar_k for every user at (T, G).
std::vector<CMatrix> averaged_mse(const NetworkConfig& cfg, const CMatrix& h_est, const CMatrix& t,
                                  const RxFilterBank& g, const RMatrix& sigma2);

RxFilterBank update_filters(const NetworkConfig& cfg, const CMatrix& h_est, const CMatrix& t, const RMatrix& sigma2);

// Omega_k = Mbar_k^{-1}.
WeightBank update_weights(std::span<const CMatrix> mse_bar);

// (H G Omega G^H H^H + Psi + lambda I)^{-1} H G Omega, minimum-norm when singular.
CMatrix precoder_for_lambda(const CMatrix& h_est, const CMatrix& g_aggregate, const CMatrix& omega_aggregate,
                            const RVector& psi, double lambda);

struct PrecoderUpdate {
  CMatrix t;
  double lambda = 0.0;
  bool clipped = false;
};

// Closed-form precoder with lambda = tr(Omega G^H G) / P_tot; scaled down to
// the sum budget if it exceeds it by more than 1e-9 relative.
PrecoderUpdate update_precoder(const CMatrix& h_est, const CMatrix& g_aggregate, const CMatrix& omega_aggregate,
                               const RVector& psi, double total_power);

// Per-user matched filter on h_est, scaled to the given power.
CMatrix matched_filter_precoder(const NetworkConfig& cfg, const CMatrix& h_est, double total_power);

SolverState robust_wmmse(const NetworkConfig& cfg, const CMatrix& h_est, const RMatrix& sigma2,
                         const SolverOptions& opts, const std::optional<CMatrix>& t_init = std::nullopt);

// Non-robust algorithm (all error variances zero).
SolverState wmmse(const NetworkConfig& cfg, const CMatrix& h, const SolverOptions& opts,
                  const std::optional<CMatrix>& t_init = std::nullopt);

}  // namespace hierprec
