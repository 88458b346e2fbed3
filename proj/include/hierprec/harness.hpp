// SPDX-License-Identifier: Apache-2.0
//
// Monte-Carlo driver: seeded trials with common random numbers across schemes
// and SNR points, aggregation, CSV / plot-script output.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hierprec/hierarchy.hpp"
#include "hierprec/model.hpp"

namespace hierprec {

struct ExperimentSpec {
  NetworkConfig network;  // power budgets are replaced per SNR point
  CsiQuality quality;
  std::vector<double> snr_grid_db;
  int trials = 1;
  std::vector<SchemeId> schemes;
  std::uint64_t base_seed = 0;
  HierarchyOptions options;

  void validate() const;
};

// Per-TX power for a given per-TX SNR with unit noise.
double snr_db_to_power(double snr_db);

// Channel and CSI of one trial; identical for every scheme and SNR point.
struct TrialDraw {
  ChannelRealization channel;
  CsiSet csi;
};

TrialDraw draw_trial(const ExperimentSpec& spec, std::uint64_t trial_index);

struct SchemeOutcome {
  SchemeId scheme = SchemeId::perfect_csit;
  double sum_rate_bits = 0.0;
  bool flagged = false;
  std::string reason;
  double max_power_ratio = 0.0;  // max_j ||W_j||^2 / P_j of the transmitted precoder
};

std::vector<SchemeOutcome> evaluate_schemes(const ExperimentSpec& spec, const TrialDraw& draw, double snr_db);

// Draws trial `trial_index` and scores every scheme of the spec at one SNR.
std::vector<SchemeOutcome> run_trial(const ExperimentSpec& spec, double snr_db, std::uint64_t trial_index);

struct TrialRecord {
  int trial = 0;
  double snr_db = 0.0;
  SchemeId scheme = SchemeId::perfect_csit;
  double sum_rate_bits = 0.0;
  bool flagged = false;
  double max_power_ratio = 0.0;
};

struct ResultRow {
  double snr_db = 0.0;
  std::string scheme;
  double mean_sum_rate_bits = 0.0;
  double std_err = 0.0;
  int trials = 0;
  int flagged = 0;

  bool operator==(const ResultRow&) const = default;
};

struct ResultTable {
  std::vector<ResultRow> rows;  // snr ascending, then scheme name ascending
  bool operator==(const ResultTable&) const = default;
};

struct SweepResult {
  ResultTable table;
  std::vector<TrialRecord> records;  // ordered by (trial, snr index, scheme index)
};

// Runs trials x SNR grid. Output does not depend on `threads`.
SweepResult run_sweep(const ExperimentSpec& spec, int threads = 1);

// Mean / standard error per (snr, scheme) over unflagged records.
ResultTable aggregate(const std::vector<TrialRecord>& records);

inline constexpr const char* kCsvHeader = "snr_db,scheme,mean_sum_rate_bits,std_err,trials,flagged";

void write_csv(const ResultTable& table, const std::filesystem::path& path);
ResultTable read_csv(const std::filesystem::path& path);
void write_trial_dump(const std::vector<TrialRecord>& records, const std::filesystem::path& path);
// gnuplot script plotting mean sum rate vs SNR per scheme from `csv_path`.
void write_plot_script(const ResultTable& table, const std::filesystem::path& csv_path,
                       const std::filesystem::path& path);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace hierprec
