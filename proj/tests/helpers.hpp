// Shared fixtures and reference implementations for the test suites.
// The reference formulas are written independently of the library code.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "hierprec/linalg.hpp"
#include "hierprec/metrics.hpp"
#include "hierprec/model.hpp"

namespace testutil {

using hierprec::cplx;
using hierprec::CMatrix;
using hierprec::NetworkConfig;
using hierprec::RMatrix;
using hierprec::RVector;

inline NetworkConfig uniform_net(int k, int m, int n, int d, double p = 1.0) {
  hierprec::RawNetworkParams raw;
  raw.tx_antennas.assign(k, m);
  raw.rx_antennas.assign(k, n);
  raw.streams.assign(k, d);
  raw.power = {p};
  return hierprec::build_config(raw);
}

inline cplx cn(std::mt19937_64& rng, double var = 1.0) {
  std::normal_distribution<double> nd(0.0, std::sqrt(var / 2.0));
  const double re = nd(rng);
  return {re, nd(rng)};
}

inline CMatrix random_matrix(std::mt19937_64& rng, int rows, int cols, double var = 1.0) {
  CMatrix m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = cn(rng, var);
  return m;
}

inline RMatrix random_sigma2(std::mt19937_64& rng, int rows, int cols, double hi = 0.5) {
  std::uniform_real_distribution<double> u(0.0, hi);
  RMatrix s(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) s(r, c) = u(rng);
  return s;
}

inline std::vector<CMatrix> random_blocks(std::mt19937_64& rng, const NetworkConfig& cfg, double var = 1.0) {
  std::vector<CMatrix> g;
  for (int k = 0; k < cfg.num_pairs(); ++k) g.push_back(random_matrix(rng, cfg.rx_antennas(k), cfg.streams(k), var));
  return g;
}

// Random Hermitian PD weights.
inline std::vector<CMatrix> random_weights(std::mt19937_64& rng, const NetworkConfig& cfg) {
  std::vector<CMatrix> w;
  for (int k = 0; k < cfg.num_pairs(); ++k) {
    const int d = cfg.streams(k);
    const CMatrix a = random_matrix(rng, d, d);
    w.push_back(a * a.adjoint() + CMatrix::Identity(d, d));
  }
  return w;
}

// M_k from the error covariance: A = G_k^H H_k^H T - S_k, M_k = A A^H + G_k^H G_k,
// plus G_k^H diag(phi) G_k with phi_i = sum_p sigma2(p, i) sum_s |T(p, s)|^2.
inline CMatrix ref_mse(const NetworkConfig& cfg, const CMatrix& h, const CMatrix& t, const CMatrix& gk, int k,
                       const RMatrix* sigma2 = nullptr) {
  const int n0 = cfg.rx_offset(k), nk = cfg.rx_antennas(k);
  const int d0 = cfg.stream_offset(k), dk = cfg.streams(k);
  CMatrix sel = CMatrix::Zero(dk, t.cols());
  for (int s = 0; s < dk; ++s) sel(s, d0 + s) = 1.0;
  const CMatrix hk = h.middleCols(n0, nk);
  const CMatrix a = gk.adjoint() * hk.adjoint() * t - sel;
  CMatrix m = a * a.adjoint() + gk.adjoint() * gk;
  if (sigma2) {
    CMatrix phi = CMatrix::Zero(nk, nk);
    for (int i = 0; i < nk; ++i) {
      double acc = 0.0;
      for (int p = 0; p < t.rows(); ++p) acc += (*sigma2)(p, n0 + i) * t.row(p).squaredNorm();
      phi(i, i) = acc;
    }
    m += gk.adjoint() * phi * gk;
  }
  return m;
}

// sum_k tr(W_k Mbar_k)
inline double ref_weighted_mse(const NetworkConfig& cfg, const CMatrix& h, const CMatrix& t,
                               const std::vector<CMatrix>& g, const std::vector<CMatrix>& w, const RMatrix& sigma2) {
  double acc = 0.0;
  for (int k = 0; k < cfg.num_pairs(); ++k) acc += (w[k] * ref_mse(cfg, h, t, g[k], k, &sigma2)).trace().real();
  return acc;
}

// d f / d conj(X) by central differences on the real and imaginary parts.
template <class F>
CMatrix wirtinger_gradient(F&& f, const CMatrix& x, double step = 1e-5) {
  CMatrix grad(x.rows(), x.cols());
  for (int c = 0; c < x.cols(); ++c) {
    for (int r = 0; r < x.rows(); ++r) {
      CMatrix xp = x, xm = x;
      xp(r, c) += step;
      xm(r, c) -= step;
      const double dre = (f(xp) - f(xm)) / (2 * step);
      xp = x;
      xm = x;
      xp(r, c) += cplx(0, step);
      xm(r, c) -= cplx(0, step);
      const double dim = (f(xp) - f(xm)) / (2 * step);
      grad(r, c) = 0.5 * cplx(dre, dim);
    }
  }
  return grad;
}

inline double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Single-antenna SINR rate of user k, channel column h(:, k), streams = columns of T.
inline double sinr_rate(const CMatrix& h, const CMatrix& t, int k) {
  const auto hk = h.col(k);
  double interference = 1.0;
  for (int j = 0; j < t.cols(); ++j) {
    if (j != k) interference += std::norm(hk.dot(t.col(j)));
  }
  return std::log2(1.0 + std::norm(hk.dot(t.col(k))) / interference);
}

}  // namespace testutil
