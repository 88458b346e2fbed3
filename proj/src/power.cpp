// SPDX-License-Identifier: Apache-2.0

#include "hierprec/power.hpp"

#include <algorithm>
#include <cmath>

#include "hierprec/errors.hpp"
#include "hierprec/metrics.hpp"

namespace hierprec {

CMatrix clip_w_opt(const CMatrix& w_opt, const CMatrix& w_in, double total_power) {
  const double norm = w_opt.norm();
  if (norm == 0.0) return w_opt;
  const double budget = total_power - w_in.squaredNorm();
  if (budget <= 0.0) return CMatrix::Zero(w_opt.rows(), w_opt.cols());
  const double target = std::min(norm, std::sqrt(budget));
  if (target == norm) return w_opt;
  return w_opt * (target / norm);
}

NormalizeResult per_tx_normalize(const NetworkConfig& cfg, const CMatrix& t) {
  if (t.rows() != cfg.total_tx_antennas()) throw ShapeError("per_tx_normalize: precoder must have M_tot rows");
  const auto powers = tx_block_powers(cfg, t);
  NormalizeResult out{t, 0.0, false};
  for (int j = 0; j < cfg.num_pairs(); ++j) {
    out.ratio = std::max(out.ratio, powers[static_cast<std::size_t>(j)] / cfg.power(j));
  }
  if (out.ratio > 1.0) {
    out.t /= std::sqrt(out.ratio);
    out.scaled = true;
  }
  return out;
}

FreeNormalizeResult per_tx_normalize_free(const NetworkConfig& cfg, const CMatrix& t, int first_free, double slack) {
  if (t.rows() != cfg.total_tx_antennas()) throw ShapeError("per_tx_normalize: precoder must have M_tot rows");
  const auto powers = tx_block_powers(cfg, t);
  FreeNormalizeResult out{t, 0.0, false, false};
  for (int j = 0; j < cfg.num_pairs(); ++j) {
    const double r = powers[static_cast<std::size_t>(j)] / cfg.power(j);
    if (j < first_free) {
      out.fixed_violation = out.fixed_violation || r > 1.0 + slack;
    } else {
      out.ratio = std::max(out.ratio, r);
    }
  }
  if (out.ratio > 1.0 && first_free < cfg.num_pairs()) {
    const int row = cfg.tx_offset(first_free);
    out.t.bottomRows(t.rows() - row) /= std::sqrt(out.ratio);
    out.scaled = true;
  }
  return out;
}

}  // namespace hierprec
