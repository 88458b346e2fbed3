// SPDX-License-Identifier: Apache-2.0
//
// Hierarchical precoding with nested CSI.
//
// TXs are processed in index order (TX 0 has the coarsest CSI). Stage j works
// on TX j's own estimate: the row blocks of TXs 0..j-1 are already decided
// (TX j can reproduce them from the estimates it holds) and stay fixed, while
// the remaining rows are optimized as if every better-informed TX shared TX
// j's estimate. Only TX j's own block of the stage solution is transmitted.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hierprec/linalg.hpp"
#include "hierprec/model.hpp"
#include "hierprec/power.hpp"
#include "hierprec/wmmse.hpp"

namespace hierprec {

enum class SchemeId { perfect_csit, naive_distributed, hier_bisection, hier_clipping };

// CLI / CSV names: perfect, naive, hier-bisect, hier-clip.
std::string_view scheme_name(SchemeId id);
// Accepts the CLI names and the enumerator spellings. Throws ConfigError.
SchemeId parse_scheme(std::string_view name);
std::span<const SchemeId> all_schemes();

enum class FreeBlockRule {
  bisection,  // exact multiplier for the remaining sum budget
  clipping,   // multiplier 0, then scale down to the remaining budget
};

// T = [W_In; W_Opt] split at the first row of the pivot TX.
struct PrecoderPartition {
  int pivot = 0;
  CMatrix w_in;   // M_In x d_tot
  CMatrix w_opt;  // M_Opt x d_tot

  static PrecoderPartition split(const NetworkConfig& cfg, const CMatrix& t, int pivot);
  CMatrix stack() const;
};

struct HierarchyOptions {
  SolverOptions solver;
  bool perfect_normalize_each_round = true;
  bool naive_normalize_each_round = true;
  // Per-TX normalization of the free rows after every stage precoder update;
  // otherwise only once, after the stage converges.
  bool stage_normalize_each_round = true;
  // Keep the free-row block of Psi inside the fixed-block precoder update.
  bool psi_in_fixed_block = true;
  // Start stage j from stage j-1's full precoder instead of a matched filter.
  bool warm_start_stages = true;
  double bisection_tolerance = 1e-10;  // relative power residual
  int bisection_max_iterations = 300;
};

// Free-block precoder that zeroes the Lagrangian derivative w.r.t. the free
// rows for a given multiplier:
//   W_Opt = (H_Opt G W G^H H_Opt^H + Psi_Opt + lambda I)^{-1} H_Opt G W (I - G^H H_In^H W_In).
// h_est is M_tot x N_tot; its first w_in.rows() rows are H_In.
CMatrix update_w_opt(const CMatrix& h_est, const CMatrix& g_aggregate, const CMatrix& omega_aggregate,
                     const RVector& psi, const CMatrix& w_in, double lambda, bool include_psi = true);

struct BisectionResult {
  double lambda = 0.0;
  CMatrix w_opt;
  bool flagged = false;  // non-positive budget
  int iterations = 0;
};

// Smallest lambda >= 0 whose free block fits the budget (power = budget when lambda > 0).
BisectionResult solve_lambda_bisection(const CMatrix& h_est, const CMatrix& g_aggregate,
                                       const CMatrix& omega_aggregate, const RVector& psi, const CMatrix& w_in,
                                       double power_budget, const HierarchyOptions& opts = {});

struct StageResult {
  SolverState state;  // full precoder [W_In; W_Opt] and the stage's filters/weights
  bool flagged = false;
};

// One hierarchical stage: alternating G / Omega / W_Opt updates with the rows
// of TXs 0..pivot-1 fixed to w_in, under the sum budget P_tot.
StageResult fixed_block_wmmse(const NetworkConfig& cfg, const CMatrix& h_est, const RMatrix& sigma2,
                              const CMatrix& w_in, FreeBlockRule rule, const HierarchyOptions& opts,
                              const std::optional<CMatrix>& t_init = std::nullopt);

struct EffectivePrecoder {
  CMatrix t;
  SchemeId scheme = SchemeId::perfect_csit;
  bool flagged = false;
  std::string flag_reason;
  std::vector<int> stage_iterations;
};

EffectivePrecoder hierarchical_precode(const NetworkConfig& cfg, const CsiSet& csi, FreeBlockRule rule,
                                       const HierarchyOptions& opts);

// Each TX runs the robust solver on its own estimate and keeps its own block.
EffectivePrecoder naive_distributed_precode(const NetworkConfig& cfg, const CsiSet& csi,
                                            const HierarchyOptions& opts);

// Non-robust solver on the true channel.
EffectivePrecoder perfect_csit_precode(const NetworkConfig& cfg, const ChannelRealization& channel,
                                       const HierarchyOptions& opts);

EffectivePrecoder precode(SchemeId scheme, const NetworkConfig& cfg, const ChannelRealization& channel,
                          const CsiSet& csi, const HierarchyOptions& opts);

}  // namespace hierprec
