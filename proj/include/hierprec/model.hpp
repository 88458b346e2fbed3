// SPDX-License-Identifier: Apache-2.0
//
// Network topology, channel draws and hierarchical per-TX CSI estimates.
//
// Storage convention: the aggregate channel H is M_tot x N_tot, so that H^H is
// the N_tot x M_tot downlink matrix. Rows belong to TX antennas, columns to RX
// antennas. TX/RX indices are zero-based throughout the code.

#pragma once

#include <random>
#include <span>
#include <vector>

#include "hierprec/linalg.hpp"

namespace hierprec {

struct RawNetworkParams {
  std::vector<int> tx_antennas;  // M_i
  std::vector<int> rx_antennas;  // N_i
  std::vector<int> streams;      // d_i
  // Link variances rho^2_{i,k}, row-major over (RX i, TX k). A single value is broadcast.
  std::vector<double> rho2{1.0};
  // Per-TX power budgets P_j. A single value is broadcast.
  std::vector<double> power{1.0};
};

class NetworkConfig {
 public:
  int num_pairs() const { return static_cast<int>(tx_antennas_.size()); }
  int tx_antennas(int j) const { return tx_antennas_.at(j); }
  int rx_antennas(int i) const { return rx_antennas_.at(i); }
  int streams(int i) const { return streams_.at(i); }
  double link_variance(int rx, int tx) const { return rho2_(rx, tx); }
  double power(int j) const { return power_.at(j); }
  const std::vector<double>& powers() const { return power_; }
  double total_power() const;

  int total_tx_antennas() const { return tx_offsets_.back(); }
  int total_rx_antennas() const { return rx_offsets_.back(); }
  int total_streams() const { return stream_offsets_.back(); }

  // First row of TX j in H and T.
  int tx_offset(int j) const { return tx_offsets_.at(j); }
  // First column of RX i in H.
  int rx_offset(int i) const { return rx_offsets_.at(i); }
  // First column of user i's streams in T.
  int stream_offset(int i) const { return stream_offsets_.at(i); }

  // Same topology with new per-TX budgets (validated).
  NetworkConfig with_powers(std::vector<double> power) const;

 private:
  friend NetworkConfig build_config(const RawNetworkParams& raw);
  NetworkConfig() = default;

  std::vector<int> tx_antennas_;
  std::vector<int> rx_antennas_;
  std::vector<int> streams_;
  RMatrix rho2_;
  std::vector<double> power_;
  std::vector<int> tx_offsets_;
  std::vector<int> rx_offsets_;
  std::vector<int> stream_offsets_;
};

// Validates the raw bundle and computes the totals. Throws ConfigError.
NetworkConfig build_config(const RawNetworkParams& raw);

class ChannelRealization {
 public:
  explicit ChannelRealization(CMatrix h) : h_(std::move(h)) {}
  const CMatrix& matrix() const { return h_; }
  // H_k: M_tot x N_k, the columns of RX k.
  CMatrix rx_block(const NetworkConfig& cfg, int k) const;

 private:
  CMatrix h_;
};

ChannelRealization draw_channel(const NetworkConfig& cfg, std::mt19937_64& rng);

// Per-TX CSI error variances (sigma^{(j)})^2, one M_tot x N_tot table per TX.
class CsiQuality {
 public:
  // Expands per-TX K x K tables of sigma^2 indexed (RX i, TX k) to per-entry tables.
  static CsiQuality from_blocks(const NetworkConfig& cfg, std::span<const RMatrix> block_sigma2);
  // One sigma^2 value per TX, applied to every link.
  static CsiQuality uniform(const NetworkConfig& cfg, std::span<const double> sigma2_per_tx);
  static CsiQuality perfect(const NetworkConfig& cfg);

  int num_tx() const { return static_cast<int>(sigma2_.size()); }
  const RMatrix& sigma2(int j) const { return sigma2_.at(j); }
  bool is_perfect() const;

 private:
  explicit CsiQuality(std::vector<RMatrix> sigma2);
  std::vector<RMatrix> sigma2_;
};

class CsiSet {
 public:
  CsiSet(std::vector<CMatrix> estimates, CsiQuality quality);

  int num_tx() const { return static_cast<int>(estimates_.size()); }
  const CMatrix& estimate(int j) const { return estimates_.at(j); }
  const CsiQuality& quality() const { return quality_; }
  // Estimates available at TX j: those of TXs 0..j.
  std::span<const CMatrix> view(int j) const;

 private:
  std::vector<CMatrix> estimates_;
  CsiQuality quality_;
};

// Hat H^{(j)} = sqrt(1 - sigma^2) H + sigma Delta^{(j)}, Delta i.i.d. CN(0, 1),
// independent across TXs. Throws ConfigError on shape mismatch.
CsiSet draw_csi(const NetworkConfig& cfg, const ChannelRealization& channel, const CsiQuality& quality,
                std::mt19937_64& rng);

// One CN(0, variance) sample.
cplx complex_gaussian(std::mt19937_64& rng, double variance = 1.0);

}  // namespace hierprec
