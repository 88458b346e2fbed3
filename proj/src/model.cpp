// SPDX-License-Identifier: Apache-2.0

#include "hierprec/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hierprec/errors.hpp"

namespace hierprec {

namespace {

std::vector<int> prefix_offsets(const std::vector<int>& counts) {
  std::vector<int> off(counts.size() + 1, 0);
  std::partial_sum(counts.begin(), counts.end(), off.begin() + 1);
  return off;
}

std::vector<double> broadcast(const std::vector<double>& values, std::size_t n, const char* what) {
  if (values.size() == 1) return std::vector<double>(n, values.front());
  if (values.size() != n) {
    throw ConfigError(std::string(what) + ": expected 1 or " + std::to_string(n) + " values, got " +
                      std::to_string(values.size()));
  }
  return values;
}

void check_powers(const std::vector<double>& p) {
  for (double v : p) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("power budgets must be positive and finite");
  }
}

}  // namespace

double NetworkConfig::total_power() const { return std::accumulate(power_.begin(), power_.end(), 0.0); }

NetworkConfig NetworkConfig::with_powers(std::vector<double> power) const {
  NetworkConfig out = *this;
  out.power_ = broadcast(power, tx_antennas_.size(), "power");
  check_powers(out.power_);
  return out;
}

NetworkConfig build_config(const RawNetworkParams& raw) {
  const std::size_t k = raw.tx_antennas.size();
  if (k == 0) throw ConfigError("network must contain at least one TX/RX pair");
  if (raw.rx_antennas.size() != k || raw.streams.size() != k) {
    throw ConfigError("dimension lists must all have length K = " + std::to_string(k));
  }
  auto positive = [](const std::vector<int>& v) { return std::all_of(v.begin(), v.end(), [](int x) { return x >= 1; }); };
  if (!positive(raw.tx_antennas) || !positive(raw.rx_antennas) || !positive(raw.streams)) {
    throw ConfigError("antenna and stream counts must be >= 1");
  }

  NetworkConfig cfg;
  cfg.tx_antennas_ = raw.tx_antennas;
  cfg.rx_antennas_ = raw.rx_antennas;
  cfg.streams_ = raw.streams;
  cfg.tx_offsets_ = prefix_offsets(raw.tx_antennas);
  cfg.rx_offsets_ = prefix_offsets(raw.rx_antennas);
  cfg.stream_offsets_ = prefix_offsets(raw.streams);

  const int m_tot = cfg.total_tx_antennas();
  for (std::size_t i = 0; i < k; ++i) {
    if (raw.streams[i] > std::min(raw.rx_antennas[i], m_tot)) {
      throw ConfigError("user " + std::to_string(i + 1) + ": d_i = " + std::to_string(raw.streams[i]) +
                        " exceeds min(N_i, M_tot)");
    }
  }

  const auto rho2 = broadcast(raw.rho2, k * k, "rho2");
  cfg.rho2_.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      const double v = rho2[i * k + c];
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("link variances must be positive and finite");
      cfg.rho2_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v;
    }
  }

  cfg.power_ = broadcast(raw.power, k, "power");
  check_powers(cfg.power_);
  return cfg;
}

CMatrix ChannelRealization::rx_block(const NetworkConfig& cfg, int k) const {
  return h_.middleCols(cfg.rx_offset(k), cfg.rx_antennas(k));
}

cplx complex_gaussian(std::mt19937_64& rng, double variance) {
  std::normal_distribution<double> dist(0.0, std::sqrt(0.5 * variance));
  const double re = dist(rng);
  const double im = dist(rng);
  return {re, im};
}

ChannelRealization draw_channel(const NetworkConfig& cfg, std::mt19937_64& rng) {
  const int k = cfg.num_pairs();
  CMatrix h(cfg.total_tx_antennas(), cfg.total_rx_antennas());
  std::normal_distribution<double> unit(0.0, std::sqrt(0.5));
  // Column-major fill keeps the draw order fixed for a given topology.
  for (int rx = 0; rx < k; ++rx) {
    for (int q = cfg.rx_offset(rx); q < cfg.rx_offset(rx + 1); ++q) {
      for (int tx = 0; tx < k; ++tx) {
        const double sd = std::sqrt(cfg.link_variance(rx, tx));
        for (int p = cfg.tx_offset(tx); p < cfg.tx_offset(tx + 1); ++p) {
          const double re = unit(rng);
          const double im = unit(rng);
          h(p, q) = sd * cplx(re, im);
        }
      }
    }
  }
  return ChannelRealization(std::move(h));
}

CsiQuality::CsiQuality(std::vector<RMatrix> sigma2) : sigma2_(std::move(sigma2)) {
  for (const auto& s : sigma2_) {
    if (!s.allFinite() || s.minCoeff() < 0.0 || s.maxCoeff() >= 1.0) {
      throw ConfigError("CSI error variances must lie in [0, 1)");
    }
  }
  // TX j must be at least as well informed as every TX before it.
  for (std::size_t j = 1; j < sigma2_.size(); ++j) {
    if ((sigma2_[j].array() > sigma2_[j - 1].array()).any()) {
      throw ConfigError("CSI qualities violate the hierarchical ordering at TX " + std::to_string(j + 1));
    }
  }
}

CsiQuality CsiQuality::from_blocks(const NetworkConfig& cfg, std::span<const RMatrix> block_sigma2) {
  const int k = cfg.num_pairs();
  if (static_cast<int>(block_sigma2.size()) != k) throw ConfigError("need one sigma^2 table per TX");
  std::vector<RMatrix> tables;
  tables.reserve(block_sigma2.size());
  for (const auto& blocks : block_sigma2) {
    if (blocks.rows() != k || blocks.cols() != k) throw ConfigError("sigma^2 tables must be K x K (RX, TX)");
    RMatrix t(cfg.total_tx_antennas(), cfg.total_rx_antennas());
    for (int rx = 0; rx < k; ++rx) {
      for (int tx = 0; tx < k; ++tx) {
        t.block(cfg.tx_offset(tx), cfg.rx_offset(rx), cfg.tx_antennas(tx), cfg.rx_antennas(rx))
            .setConstant(blocks(rx, tx));
      }
    }
    tables.push_back(std::move(t));
  }
  return CsiQuality(std::move(tables));
}

CsiQuality CsiQuality::uniform(const NetworkConfig& cfg, std::span<const double> sigma2_per_tx) {
  std::vector<RMatrix> blocks;
  for (double s : sigma2_per_tx) blocks.push_back(RMatrix::Constant(cfg.num_pairs(), cfg.num_pairs(), s));
  return from_blocks(cfg, blocks);
}

CsiQuality CsiQuality::perfect(const NetworkConfig& cfg) {
  const std::vector<double> zeros(static_cast<std::size_t>(cfg.num_pairs()), 0.0);
  return uniform(cfg, zeros);
}

bool CsiQuality::is_perfect() const {
  return std::all_of(sigma2_.begin(), sigma2_.end(), [](const RMatrix& s) { return s.isZero(0.0); });
}

CsiSet::CsiSet(std::vector<CMatrix> estimates, CsiQuality quality)
    : estimates_(std::move(estimates)), quality_(std::move(quality)) {
  if (static_cast<int>(estimates_.size()) != quality_.num_tx()) {
    throw ShapeError("CsiSet: one estimate per TX required");
  }
}

std::span<const CMatrix> CsiSet::view(int j) const {
  if (j < 0 || j >= num_tx()) throw std::out_of_range("CsiSet::view: TX index out of range");
  return std::span<const CMatrix>(estimates_.data(), static_cast<std::size_t>(j) + 1);
}

CsiSet draw_csi(const NetworkConfig& cfg, const ChannelRealization& channel, const CsiQuality& quality,
                std::mt19937_64& rng) {
  const CMatrix& h = channel.matrix();
  if (quality.num_tx() != cfg.num_pairs()) throw ConfigError("CSI quality must cover every TX");
  if (h.rows() != cfg.total_tx_antennas() || h.cols() != cfg.total_rx_antennas()) {
    throw ShapeError("draw_csi: channel does not match the network dimensions");
  }
  std::normal_distribution<double> unit(0.0, std::sqrt(0.5));
  std::vector<CMatrix> estimates;
  estimates.reserve(static_cast<std::size_t>(cfg.num_pairs()));
  for (int j = 0; j < cfg.num_pairs(); ++j) {
    const RMatrix& s2 = quality.sigma2(j);
    if (s2.rows() != h.rows() || s2.cols() != h.cols()) throw ShapeError("draw_csi: sigma^2 table shape mismatch");
    CMatrix est(h.rows(), h.cols());
    for (Eigen::Index q = 0; q < h.cols(); ++q) {
      for (Eigen::Index p = 0; p < h.rows(); ++p) {
        // Always consume the error draw so the stream layout does not depend on sigma.
        const double re = unit(rng);
        const double im = unit(rng);
        const double v = s2(p, q);
        est(p, q) = std::sqrt(1.0 - v) * h(p, q) + std::sqrt(v) * cplx(re, im);
      }
    }
    estimates.push_back(std::move(est));
  }
  return CsiSet(std::move(estimates), quality);
}

}  // namespace hierprec
