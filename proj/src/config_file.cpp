// SPDX-License-Identifier: Apache-2.0

#include "hierprec/config_file.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hierprec/errors.hpp"

namespace hierprec {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Whitespace- or comma-separated tokens.
std::vector<std::string> tokens(std::string_view text) {
  std::string s(text);
  for (char& c : s) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

double to_double(const std::string& t, std::string_view key) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(std::string(key) + ": '" + t + "' is not a number");
  }
  return v;
}

long long to_integer(const std::string& t, std::string_view key) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(std::string(key) + ": '" + t + "' is not an integer");
  }
  return v;
}

std::vector<double> doubles(const std::string& text, std::string_view key) {
  std::vector<double> out;
  for (const auto& t : tokens(text)) out.push_back(to_double(t, key));
  if (out.empty()) throw ConfigError(std::string(key) + ": no values");
  return out;
}

std::vector<int> counts(const std::string& text, std::string_view key, std::size_t k) {
  std::vector<int> out;
  for (const auto& t : tokens(text)) out.push_back(static_cast<int>(to_integer(t, key)));
  if (out.size() == 1 && k > 1) out.assign(k, out.front());
  return out;
}

bool to_bool(const std::string& t, std::string_view key) {
  const std::string v = trim(t);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(std::string(key) + ": '" + v + "' is not a boolean");
}

}  // namespace

std::vector<double> parse_snr_grid(std::string_view text) {
  const std::string s = trim(text);
  if (s.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(trim(p));
    if (parts.size() != 3) throw ConfigError("SNR range must be start:stop:step");
    const double start = to_double(parts[0], "snr");
    const double stop = to_double(parts[1], "snr");
    const double step = to_double(parts[2], "snr");
    if (!(step > 0.0) || stop < start) throw ConfigError("SNR range needs step > 0 and stop >= start");
    std::vector<double> grid;
    const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
    for (long long i = 0; i <= n; ++i) grid.push_back(start + static_cast<double>(i) * step);
    return grid;
  }
  return doubles(s, "snr");
}

std::vector<SchemeId> parse_scheme_list(std::string_view text) {
  std::vector<SchemeId> out;
  for (const auto& t : tokens(text)) {
    const SchemeId id = parse_scheme(t);
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  }
  if (out.empty()) throw ConfigError("scheme list is empty");
  return out;
}

ExperimentSpec parse_experiment(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }

  for (const auto& [section, _] : tree) {
    if (section != "network" && section != "quality" && section != "experiment") {
      throw ConfigError("unknown section or top-level key '" + section + "'");
    }
  }
  const auto net = tree.get_child_optional("network");
  if (!net) throw ConfigError("missing [network] section");
  for (const auto& [name, _] : *net) {
    if (name != "tx_antennas" && name != "rx_antennas" && name != "streams" && name != "rho2" && name != "K") {
      throw ConfigError("[network]: unknown key '" + name + "'");
    }
  }
  const auto tx_text = net->get_optional<std::string>("tx_antennas");
  if (!tx_text) throw ConfigError("[network] needs tx_antennas");
  std::size_t k = tokens(*tx_text).size();
  if (const auto kv = net->get_optional<std::string>("K")) k = static_cast<std::size_t>(to_integer(trim(*kv), "K"));
  if (k == 0) throw ConfigError("K must be >= 1");

  RawNetworkParams raw;
  raw.tx_antennas = counts(*tx_text, "tx_antennas", k);
  raw.rx_antennas = counts(net->get<std::string>("rx_antennas", "1"), "rx_antennas", k);
  raw.streams = counts(net->get<std::string>("streams", "1"), "streams", k);
  raw.rho2 = doubles(net->get<std::string>("rho2", "1"), "rho2");
  raw.power = {1.0};
  const NetworkConfig cfg = build_config(raw);

  std::vector<RMatrix> blocks;
  const auto quality = tree.get_child_optional("quality");
  for (std::size_t j = 0; j < k; ++j) {
    const std::string key = "tx" + std::to_string(j + 1);
    RMatrix b = RMatrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    if (quality) {
      if (const auto v = quality->get_optional<std::string>(key)) {
        const auto vals = doubles(*v, key);
        if (vals.size() == 1) {
          b.setConstant(vals.front());
        } else if (vals.size() == k * k) {
          for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t c = 0; c < k; ++c) {
              b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = vals[i * k + c];
            }
          }
        } else {
          throw ConfigError(key + ": expected 1 or K*K sigma^2 values");
        }
      }
    }
    blocks.push_back(std::move(b));
  }
  if (quality) {
    for (const auto& [name, _] : *quality) {
      bool known = false;
      for (std::size_t j = 0; j < k; ++j) known = known || name == "tx" + std::to_string(j + 1);
      if (!known) throw ConfigError("[quality]: unknown key '" + name + "'");
    }
  }

  ExperimentSpec spec{cfg, CsiQuality::from_blocks(cfg, blocks), {0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0}, 1000,
                      std::vector<SchemeId>(all_schemes().begin(), all_schemes().end()), 42, HierarchyOptions{}};

  if (const auto exp = tree.get_child_optional("experiment")) {
    for (const auto& [name, node] : *exp) {
      const std::string v = trim(node.data());
      if (name == "snr_db") {
        spec.snr_grid_db = parse_snr_grid(v);
      } else if (name == "trials") {
        spec.trials = static_cast<int>(to_integer(v, name));
      } else if (name == "schemes") {
        spec.schemes = parse_scheme_list(v);
      } else if (name == "seed") {
        spec.base_seed = static_cast<std::uint64_t>(to_integer(v, name));
      } else if (name == "max_iterations") {
        spec.options.solver.max_iterations = static_cast<int>(to_integer(v, name));
      } else if (name == "tolerance") {
        spec.options.solver.tolerance = to_double(v, name);
      } else if (name == "perfect_normalize_each_round") {
        spec.options.perfect_normalize_each_round = to_bool(v, name);
      } else if (name == "naive_normalize_each_round") {
        spec.options.naive_normalize_each_round = to_bool(v, name);
      } else if (name == "stage_normalize_each_round") {
        spec.options.stage_normalize_each_round = to_bool(v, name);
      } else if (name == "warm_start_stages") {
        spec.options.warm_start_stages = to_bool(v, name);
      } else if (name == "psi_in_fixed_block") {
        spec.options.psi_in_fixed_block = to_bool(v, name);
      } else {
        throw ConfigError("[experiment]: unknown key '" + name + "'");
      }
    }
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment(buf.str());
}

}  // namespace hierprec
