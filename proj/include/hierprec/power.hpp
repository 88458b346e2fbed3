// SPDX-License-Identifier: Apache-2.0
//
// Power-feasibility maps: clipping a free precoder block to the remaining
// sum budget and scaling a precoder down to per-TX budgets.

#pragma once

#include "hierprec/linalg.hpp"
#include "hierprec/model.hpp"

namespace hierprec {

// Scales W_Opt to norm min(||W_Opt||, sqrt(P_tot - ||W_In||^2)). A zero block
// or a non-positive remaining budget yields zero / passes zero through.
CMatrix clip_w_opt(const CMatrix& w_opt, const CMatrix& w_in, double total_power);

struct NormalizeResult {
  CMatrix t;
  double ratio = 0.0;  // max_j ||W_j||^2 / P_j before scaling
  bool scaled = false;
};

// If r = max_j ||W_j||^2 / P_j exceeds 1, divides T by sqrt(r) so the most
// loaded TX meets its budget with equality. Never scales up.
NormalizeResult per_tx_normalize(const NetworkConfig& cfg, const CMatrix& t);

// Same rule restricted to TXs first_free..K-1: only their rows are scaled and
// only their ratios count. Rows of earlier TXs are returned untouched;
// fixed_violation reports whether any of them exceeds its budget.
struct FreeNormalizeResult {
  CMatrix t;
  double ratio = 0.0;
  bool scaled = false;
  bool fixed_violation = false;
};
FreeNormalizeResult per_tx_normalize_free(const NetworkConfig& cfg, const CMatrix& t, int first_free,
                                          double slack = 1e-9);

}  // namespace hierprec
