// SPDX-License-Identifier: Apache-2.0

#include "hierprec/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "hierprec/errors.hpp"
#include "hierprec/metrics.hpp"

namespace hierprec {

namespace {

std::mt19937_64 trial_stream(std::uint64_t base_seed, std::uint64_t trial_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32),
                    static_cast<std::uint32_t>(trial_index), static_cast<std::uint32_t>(trial_index >> 32)};
  return std::mt19937_64(seq);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double_field(const std::string& s, const std::filesystem::path& path) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IoError("'" + path.string() + "': bad number '" + s + "'");
  }
  return v;
}

int parse_int_field(const std::string& s, const std::filesystem::path& path) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IoError("'" + path.string() + "': bad integer '" + s + "'");
  }
  return v;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (snr_grid_db.empty()) throw ConfigError("SNR grid must not be empty");
  if (schemes.empty()) throw ConfigError("at least one scheme is required");
  if (quality.num_tx() != network.num_pairs()) throw ConfigError("CSI quality must cover every TX");
  for (double s : snr_grid_db) {
    if (!std::isfinite(s)) throw ConfigError("SNR values must be finite");
  }
  options.solver.validate();
}

double snr_db_to_power(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

TrialDraw draw_trial(const ExperimentSpec& spec, std::uint64_t trial_index) {
  auto rng = trial_stream(spec.base_seed, trial_index);
  ChannelRealization channel = draw_channel(spec.network, rng);
  CsiSet csi = draw_csi(spec.network, channel, spec.quality, rng);
  return TrialDraw{std::move(channel), std::move(csi)};
}

std::vector<SchemeOutcome> evaluate_schemes(const ExperimentSpec& spec, const TrialDraw& draw, double snr_db) {
  const NetworkConfig cfg = spec.network.with_powers({snr_db_to_power(snr_db)});
  std::vector<SchemeOutcome> out;
  out.reserve(spec.schemes.size());
  for (SchemeId id : spec.schemes) {
    SchemeOutcome o;
    o.scheme = id;
    try {
      const EffectivePrecoder p = precode(id, cfg, draw.channel, draw.csi, spec.options);
      const auto powers = tx_block_powers(cfg, p.t);
      for (int j = 0; j < cfg.num_pairs(); ++j) {
        o.max_power_ratio = std::max(o.max_power_ratio, powers[static_cast<std::size_t>(j)] / cfg.power(j));
      }
      if (p.flagged) {
        o.flagged = true;
        o.reason = p.flag_reason;
      } else {
        const RateReport r = evaluate_rates(cfg, draw.channel, p.t);
        o.sum_rate_bits = r.sum;
        if (!std::isfinite(o.sum_rate_bits)) {
          o.flagged = true;
          o.reason = "non-finite rate";
        }
      }
    } catch (const NumericalError& e) {
      o.flagged = true;
      o.reason = e.what();
    } catch (const PowerViolation& e) {
      o.flagged = true;
      o.reason = e.what();
    }
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<SchemeOutcome> run_trial(const ExperimentSpec& spec, double snr_db, std::uint64_t trial_index) {
  return evaluate_schemes(spec, draw_trial(spec, trial_index), snr_db);
}

ResultTable aggregate(const std::vector<TrialRecord>& records) {
  struct Acc {
    std::vector<double> values;
    int flagged = 0;
  };
  // Key order gives snr ascending, then scheme name ascending.
  std::map<std::pair<double, std::string>, Acc> groups;
  for (const auto& r : records) {
    Acc& a = groups[{r.snr_db, std::string(scheme_name(r.scheme))}];
    if (r.flagged) {
      ++a.flagged;
    } else {
      a.values.push_back(r.sum_rate_bits);
    }
  }
  ResultTable table;
  for (const auto& [key, acc] : groups) {
    ResultRow row;
    row.snr_db = key.first;
    row.scheme = key.second;
    row.trials = static_cast<int>(acc.values.size());
    row.flagged = acc.flagged;
    if (!acc.values.empty()) {
      // Two-pass mean / variance in record order.
      double sum = 0.0;
      for (double v : acc.values) sum += v;
      const double n = static_cast<double>(acc.values.size());
      row.mean_sum_rate_bits = sum / n;
      if (acc.values.size() > 1) {
        double ss = 0.0;
        for (double v : acc.values) ss += (v - row.mean_sum_rate_bits) * (v - row.mean_sum_rate_bits);
        row.std_err = std::sqrt(ss / (n - 1.0) / n);
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

SweepResult run_sweep(const ExperimentSpec& spec, int threads) {
  spec.validate();
  const std::size_t n_snr = spec.snr_grid_db.size();
  const std::size_t n_scheme = spec.schemes.size();
  const std::size_t per_trial = n_snr * n_scheme;
  std::vector<TrialRecord> records(static_cast<std::size_t>(spec.trials) * per_trial);

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int trial = next++; trial < spec.trials; trial = next++) {
      try {
        const TrialDraw draw = draw_trial(spec, static_cast<std::uint64_t>(trial));
        for (std::size_t si = 0; si < n_snr; ++si) {
          const auto outcomes = evaluate_schemes(spec, draw, spec.snr_grid_db[si]);
          for (std::size_t ci = 0; ci < n_scheme; ++ci) {
            TrialRecord& r = records[static_cast<std::size_t>(trial) * per_trial + si * n_scheme + ci];
            r.trial = trial;
            r.snr_db = spec.snr_grid_db[si];
            r.scheme = outcomes[ci].scheme;
            r.sum_rate_bits = outcomes[ci].sum_rate_bits;
            r.flagged = outcomes[ci].flagged;
            r.max_power_ratio = outcomes[ci].max_power_ratio;
          }
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = spec.trials;
      }
    }
  };

  const int n_threads = std::clamp(threads, 1, std::max(1, spec.trials));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  SweepResult out;
  out.table = aggregate(records);
  out.records = std::move(records);
  return out;
}

void write_csv(const ResultTable& table, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << kCsvHeader << '\n';
  for (const auto& r : table.rows) {
    out << format_double(r.snr_db) << ',' << r.scheme << ',' << format_double(r.mean_sum_rate_bits) << ','
        << format_double(r.std_err) << ',' << r.trials << ',' << r.flagged << '\n';
  }
  finish_output(out, path);
}

ResultTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw IoError("'" + path.string() + "': unexpected CSV header");
  ResultTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 6) throw IoError("'" + path.string() + "': expected 6 fields in '" + line + "'");
    ResultRow r;
    r.snr_db = parse_double_field(f[0], path);
    r.scheme = f[1];
    r.mean_sum_rate_bits = parse_double_field(f[2], path);
    r.std_err = parse_double_field(f[3], path);
    r.trials = parse_int_field(f[4], path);
    r.flagged = parse_int_field(f[5], path);
    table.rows.push_back(std::move(r));
  }
  return table;
}

void write_trial_dump(const std::vector<TrialRecord>& records, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "trial,snr_db,scheme,sum_rate_bits,flagged,max_power_ratio\n";
  for (const auto& r : records) {
    out << r.trial << ',' << format_double(r.snr_db) << ',' << scheme_name(r.scheme) << ','
        << format_double(r.sum_rate_bits) << ',' << (r.flagged ? 1 : 0) << ',' << format_double(r.max_power_ratio)
        << '\n';
  }
  finish_output(out, path);
}

void write_plot_script(const ResultTable& table, const std::filesystem::path& csv_path,
                       const std::filesystem::path& path) {
  std::vector<std::string> schemes;
  for (const auto& r : table.rows) {
    if (std::find(schemes.begin(), schemes.end(), r.scheme) == schemes.end()) schemes.push_back(r.scheme);
  }
  auto out = open_output(path);
  out << "# gnuplot -p " << path.filename().string() << "\n"
      << "set datafile separator ','\n"
      << "set key top left\n"
      << "set grid\n"
      << "set xlabel 'per-TX SNR [dB]'\n"
      << "set ylabel 'average sum rate [bits/channel use]'\n";
  if (schemes.empty()) {
    out << "# no data\n";
  } else {
    out << "plot \\\n";
    for (std::size_t i = 0; i < schemes.size(); ++i) {
      out << "  '" << csv_path.string() << "' using 1:(strcol(2) eq '" << schemes[i] << "' ? $3 : 1/0):4"
          << " with yerrorlines title '" << schemes[i] << "'" << (i + 1 < schemes.size() ? ", \\\n" : "\n");
    }
  }
  finish_output(out, path);
}

}  // namespace hierprec
