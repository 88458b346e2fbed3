// SPDX-License-Identifier: Apache-2.0
//
// INI-style experiment files:
//
//   [network]
//   tx_antennas = 1 1 1 1      ; one value per TX, or one value for all
//   rx_antennas = 1
//   streams = 1
//   rho2 = 1                   ; 1 value or K*K values, row-major (RX i, TX k)
//
//   [quality]
//   tx1 = 0.25                 ; sigma^2 at TX 1: 1 value or K*K values (RX i, TX k)
//   tx2 = 0.25
//   tx3 = 0
//   tx4 = 0
//
//   [experiment]
//   snr_db = 0:30:5            ; start:stop:step or a list
//   trials = 1000
//   schemes = perfect,naive,hier-bisect,hier-clip
//   seed = 42
//   max_iterations = 100
//   tolerance = 1e-5
//   ; optional switches (defaults shown)
//   perfect_normalize_each_round = true
//   naive_normalize_each_round = true
//   stage_normalize_each_round = true
//   psi_in_fixed_block = true
//   warm_start_stages = true
//
// Missing [quality] entries mean perfect CSI at that TX.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "hierprec/harness.hpp"

namespace hierprec {

// "0:30:5" -> {0, 5, ..., 30}; "0,10,20" -> {0, 10, 20}. Throws ConfigError.
std::vector<double> parse_snr_grid(std::string_view text);
std::vector<SchemeId> parse_scheme_list(std::string_view text);

// Throws ConfigError on bad content, IoError when the file cannot be read.
ExperimentSpec load_experiment(const std::filesystem::path& path);
ExperimentSpec parse_experiment(std::string_view text);

}  // namespace hierprec
