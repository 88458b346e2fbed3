// SPDX-License-Identifier: Apache-2.0
//
// MSE matrices, CSI-error covariance corrections, MMSE receivers and rates.

#pragma once

#include <vector>

#include "hierprec/linalg.hpp"
#include "hierprec/model.hpp"

namespace hierprec {

// Per-RX receive filters G_k (N_k x d_k).
struct RxFilterBank {
  std::vector<CMatrix> blocks;
  // G = blockdiag(G_1, ..., G_K), N_tot x d_tot.
  CMatrix aggregate() const { return block_diag(blocks); }
};

// Per-user weights Omega_k (d_k x d_k, Hermitian PD).
struct WeightBank {
  std::vector<CMatrix> blocks;
  CMatrix aggregate() const { return block_diag(blocks); }
};

struct RateReport {
  std::vector<double> per_user;  // bits per channel use
  double sum = 0.0;
};

// Diagonal of Phi for every RX antenna q: sum_p sigma2(p, q) |T T^H|_pp. Length N_tot.
RVector phi_diagonal(const RMatrix& sigma2, const CMatrix& t);

// Diagonal of Phi_k (length N_k).
RVector phi_matrix(const NetworkConfig& cfg, const RMatrix& sigma2, const CMatrix& t, int k);

// Diagonal of Psi (length M_tot): sum_q sigma2(p, q) |G W G^H|_qq with W the
// aggregate weight. With no weight, W = I.
RVector psi_diagonal(const RMatrix& sigma2, const CMatrix& g_aggregate);
RVector psi_diagonal(const RMatrix& sigma2, const CMatrix& g_aggregate, const CMatrix& omega_aggregate);

// Instantaneous MSE matrix M_k of user k on channel h (M_tot x N_tot).
CMatrix mse_matrix(const NetworkConfig& cfg, const CMatrix& h, const CMatrix& t, const CMatrix& g_k, int k);
// Averaged MSE matrix M_k + G_k^H Phi_k G_k.
CMatrix mse_matrix(const NetworkConfig& cfg, const CMatrix& h, const CMatrix& t, const CMatrix& g_k, int k,
                   const RVector& phi_k);

// G_k = (H_k^H T T^H H_k + I + Phi_k)^{-1} H_k^H T_k.
CMatrix mmse_rx_filter(const NetworkConfig& cfg, const CMatrix& h, const CMatrix& t, int k);
CMatrix mmse_rx_filter(const NetworkConfig& cfg, const CMatrix& h, const CMatrix& t, int k, const RVector& phi_k);

// Squared Frobenius norm of each TX's row block of T.
std::vector<double> tx_block_powers(const NetworkConfig& cfg, const CMatrix& t);

// Rates with true-channel MMSE receivers. Throws PowerViolation if any TX
// exceeds its budget by more than the relative slack.
RateReport evaluate_rates(const NetworkConfig& cfg, const ChannelRealization& channel, const CMatrix& t,
                          double power_slack = 1e-6);

}  // namespace hierprec
