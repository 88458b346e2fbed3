// Acceptance suite: one PASS/FAIL line per criterion; exits 1 if any fails.
//
// Usage: acceptance <path-to-simulate> <path-to-config> <scratch-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "helpers.hpp"
#include "hierprec/config_file.hpp"
#include "hierprec/harness.hpp"
#include "hierprec/hierarchy.hpp"
#include "hierprec/power.hpp"
#include "hierprec/wmmse.hpp"

using namespace hierprec;
using namespace testutil;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!v.pass) ++failures;
  std::printf("%s  [%2d] %s -- %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", id, title.c_str(), v.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Per-trial rows of a --dump-trials file.
struct DumpRow {
  int trial;
  double snr;
  std::string scheme;
  double rate;
  int flagged;
  double power_ratio;
};

std::vector<DumpRow> read_dump(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<DumpRow> rows;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string f[6];
    for (auto& x : f) std::getline(ss, x, ',');
    rows.push_back({std::stoi(f[0]), std::stod(f[1]), f[2], std::stod(f[3]), std::stoi(f[4]), std::stod(f[5])});
  }
  return rows;
}

const char* kZeroCsi = R"(
[network]
tx_antennas = 1 1 1 1
rx_antennas = 1 1 1 1
streams = 1 1 1 1
rho2 = 1

[quality]
tx1 = 0
tx2 = 0
tx3 = 0
tx4 = 0

[experiment]
snr_db = 0:30:5
trials = 100
seed = 42
)";

}  // namespace

int main(int argc, char** argv) {
  if (argc != 4) {
    std::fprintf(stderr, "usage: %s <simulate> <config> <scratch-dir>\n", argv[0]);
    return 2;
  }
  const fs::path simulate = argv[1];
  const fs::path config = argv[2];
  const fs::path scratch = argv[3];
  fs::create_directories(scratch);

  report(1, "perfect CSI at every TX: all schemes agree per trial within 1e-8 bits", [] {
    const ExperimentSpec spec = parse_experiment(kZeroCsi);
    const SweepResult r = run_sweep(spec, static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
    std::map<std::pair<int, double>, double> reference;
    for (const auto& rec : r.records) {
      if (rec.scheme == SchemeId::perfect_csit) reference[{rec.trial, rec.snr_db}] = rec.sum_rate_bits;
    }
    std::map<std::string, double> worst;
    for (const auto& rec : r.records) {
      const double d = std::abs(rec.sum_rate_bits - reference.at({rec.trial, rec.snr_db}));
      double& w = worst[std::string(scheme_name(rec.scheme))];
      w = std::max(w, rec.flagged ? INFINITY : d);
    }
    bool ok = true;
    std::string detail = "max |R - R_perfect|:";
    for (const auto& [name, w] : worst) {
      ok = ok && w <= 1e-8;
      detail += " " + name + "=" + fmt(w);
    }
    return Verdict{ok, detail};
  });

  report(2, "single user, h = 1, P = 4: rate = log2(5) +- 1e-6", [] {
    const NetworkConfig cfg = uniform_net(1, 1, 1, 1, 4.0);
    const CMatrix h = CMatrix::Constant(1, 1, 1.0);
    const SolverState s = wmmse(cfg, h, SolverOptions{});
    const double r = evaluate_rates(cfg, ChannelRealization(h), s.t).sum;
    const double err = std::abs(r - std::log2(5.0));
    return Verdict{err <= 1e-6, "rate " + fmt(r) + ", error " + fmt(err)};
  });

  report(3, "robust solver objective is non-increasing (100 instances, K=4, sigma^2=0.25)", [] {
    std::mt19937_64 rng(3);
    const std::vector<double> s2{0.25, 0.25, 0.25, 0.25};
    double worst = -INFINITY;
    for (int inst = 0; inst < 100; ++inst) {
      const NetworkConfig cfg = uniform_net(4, 1, 1, 1, std::pow(10.0, (inst % 7) * 0.5));
      const CsiQuality q = CsiQuality::uniform(cfg, s2);
      const ChannelRealization ch = draw_channel(cfg, rng);
      const CsiSet csi = draw_csi(cfg, ch, q, rng);
      const SolverState s = robust_wmmse(cfg, csi.estimate(0), q.sigma2(0), SolverOptions{});
      for (std::size_t i = 1; i < s.objective_trace.size(); ++i) {
        worst = std::max(worst, s.objective_trace[i] - s.objective_trace[i - 1]);
      }
    }
    return Verdict{worst <= 1e-9, "largest step increase " + fmt(worst)};
  });

  report(4, "averaged MSE equals the Monte-Carlo mean within 2% (10 instances, 1e5 draws)", [] {
    std::mt19937_64 rng(4);
    double worst = 0.0;
    for (int inst = 0; inst < 10; ++inst) {
      const NetworkConfig cfg = uniform_net(2, 2, 2, 1 + inst % 2, 1.0);
      const int m = cfg.total_tx_antennas(), n = cfg.total_rx_antennas(), d = cfg.total_streams();
      const CMatrix h = random_matrix(rng, m, n);
      const CMatrix t = random_matrix(rng, m, d);
      const RMatrix s2 = random_sigma2(rng, m, n, 0.5);
      const auto gb = random_blocks(rng, cfg);
      const int k = inst % 2;
      CMatrix acc = CMatrix::Zero(cfg.streams(k), cfg.streams(k));
      const int draws = 100000;
      CMatrix delta(m, n);
      for (int it = 0; it < draws; ++it) {
        for (int c = 0; c < n; ++c)
          for (int p = 0; p < m; ++p) delta(p, c) = cn(rng, s2(p, c));
        acc += mse_matrix(cfg, h + delta, t, gb[k], k);
      }
      acc /= static_cast<double>(draws);
      const CMatrix mb = mse_matrix(cfg, h, t, gb[k], k, phi_matrix(cfg, s2, t, k));
      worst = std::max(worst, (acc - mb).norm() / mb.norm());
    }
    return Verdict{worst <= 0.02, "worst relative Frobenius error " + fmt(worst)};
  });

  report(5, "Lagrangian gradients vanish after both precoder updates (20 instances)", [] {
    std::mt19937_64 rng(5);
    double worst = 0.0;
    int evaluated = 0;
    for (int inst = 0; inst < 20; ++inst) {
      const NetworkConfig cfg = uniform_net(3, 2, 1, 1, 2.0);
      const CMatrix h = random_matrix(rng, 6, 3);
      const RMatrix s2 = random_sigma2(rng, 6, 3, 0.3);
      const auto gb = random_blocks(rng, cfg);
      const auto wb = random_weights(rng, cfg);
      const CMatrix g = block_diag(gb), w = block_diag(wb);
      const RVector psi = psi_diagonal(s2, g, w);

      // centralized closed form
      const PrecoderUpdate u = update_precoder(h, g, w, psi, cfg.total_power());
      if (!u.clipped) {
        auto f = [&](const CMatrix& x) { return ref_weighted_mse(cfg, h, x, gb, wb, s2); };
        const CMatrix gf = wirtinger_gradient(f, u.t);
        worst = std::max(worst, max_abs(gf + u.lambda * u.t) / std::max(max_abs(gf), 1.0));
        ++evaluated;
      }

      // fixed-block update, pivot 1 or 2 (nonempty fixed rows)
      const int pivot = 1 + inst % 2;
      const int m_in = cfg.tx_offset(pivot);
      CMatrix w_in = random_matrix(rng, m_in, 3);
      w_in *= std::sqrt(0.4 * cfg.total_power()) / w_in.norm();
      const double budget = cfg.total_power() - w_in.squaredNorm();
      const BisectionResult b = solve_lambda_bisection(h, g, w, psi, w_in, budget);
      auto fb = [&](const CMatrix& x) {
        CMatrix t(6, 3);
        t.topRows(m_in) = w_in;
        t.bottomRows(6 - m_in) = x;
        return ref_weighted_mse(cfg, h, t, gb, wb, s2);
      };
      const CMatrix gfb = wirtinger_gradient(fb, b.w_opt);
      worst = std::max(worst, max_abs(gfb + b.lambda * b.w_opt) / std::max(max_abs(gfb), 1.0));
      ++evaluated;
    }
    return Verdict{worst <= 1e-6 && evaluated >= 20,
                   "worst relative gradient " + fmt(worst) + " over " + std::to_string(evaluated) + " updates"};
  });

  report(6, "bisection: power residual <= 1e-8 and lambda matches a 1e4-point grid (20 instances)", [] {
    std::mt19937_64 rng(6);
    double worst_res = 0.0, worst_grid = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
      const NetworkConfig cfg = uniform_net(3, 2, 1, 1, 1.0);
      const CMatrix h = random_matrix(rng, 6, 3);
      const RMatrix s2 = random_sigma2(rng, 6, 3, 0.3);
      const CMatrix g = block_diag(random_blocks(rng, cfg));
      const CMatrix w = block_diag(random_weights(rng, cfg));
      const RVector psi = psi_diagonal(s2, g, w);
      const int m_in = cfg.tx_offset(inst % 3);
      CMatrix w_in = random_matrix(rng, m_in, 3);
      if (m_in > 0) w_in *= std::sqrt(0.2) / w_in.norm();
      auto power = [&](double l) { return update_w_opt(h, g, w, psi, w_in, l).squaredNorm(); };
      const double budget = 0.25 * power(0.0);
      const BisectionResult b = solve_lambda_bisection(h, g, w, psi, w_in, budget);
      worst_res = std::max(worst_res, std::abs(b.w_opt.squaredNorm() / budget - 1.0));
      double hi = 1.0;
      while (power(hi) > budget) hi *= 2.0;
      const double step = hi / 10000;
      double best_l = 0.0, best_gap = INFINITY;
      for (int i = 0; i <= 10000; ++i) {
        const double gap = std::abs(power(step * i) - budget);
        if (gap < best_gap) {
          best_gap = gap;
          best_l = step * i;
        }
      }
      worst_grid = std::max(worst_grid, std::abs(b.lambda - best_l) / step);
    }
    return Verdict{worst_res <= 1e-8 && worst_grid <= 1.0,
                   "worst residual " + fmt(worst_res) + ", worst |lambda - grid| " + fmt(worst_grid) + " grid steps"};
  });

  const fs::path csv_a = scratch / "sweep_a.csv";
  const fs::path csv_b = scratch / "sweep_b.csv";
  const fs::path dump_a = scratch / "sweep_a_trials.csv";
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  auto run_cli = [&](const fs::path& out, const fs::path* dump, unsigned threads) {
    std::string cmd = "\"" + simulate.string() + "\" --config \"" + config.string() + "\" --snr 0:30:5 --trials 1000 --seed 42 -q" +
                      " --threads " + std::to_string(threads) + " --out \"" + out.string() + "\"";
    if (dump) cmd += " --dump-trials \"" + dump->string() + "\"";
    return std::system(cmd.c_str());
  };
  int status_a = -1;

  report(7, "two-level CSI sweep, 1000 trials, seed 42: hierarchical >= naive; slopes 20->30 dB", [&] {
    status_a = run_cli(csv_a, &dump_a, hw);
    if (status_a != 0) return Verdict{false, "simulate exited with " + std::to_string(status_a)};
    const ResultTable t = read_csv(csv_a);
    std::map<std::pair<double, std::string>, double> mean;
    for (const auto& r : t.rows) mean[{r.snr_db, r.scheme}] = r.mean_sum_rate_bits;
    bool a = t.rows.size() == 28;
    for (double snr = 0; snr <= 30; snr += 5) {
      for (const char* h : {"hier-bisect", "hier-clip"}) a = a && mean.at({snr, h}) >= mean.at({snr, "naive"});
    }
    const double sb = mean.at({30, "hier-bisect"}) - mean.at({20, "hier-bisect"});
    const double sc = mean.at({30, "hier-clip"}) - mean.at({20, "hier-clip"});
    const double sn = mean.at({30, "naive"}) - mean.at({20, "naive"});
    const bool b = sb >= 3.0 && sc >= 3.0 && sn <= 1.5;
    std::string detail = std::string("(a) ") + (a ? "ok" : "violated") + "; (b) slope hier-bisect " + fmt(sb) +
                         ", hier-clip " + fmt(sc) + ", naive " + fmt(sn) + "; at 30 dB: bisect " +
                         fmt(mean.at({30, "hier-bisect"})) + ", clip " + fmt(mean.at({30, "hier-clip"})) +
                         ", naive " + fmt(mean.at({30, "naive"})) + ", perfect " + fmt(mean.at({30, "perfect"}));
    return Verdict{a && b, detail};
  });

  report(8, "rates match the scalar SINR formula to 1e-9 bits (100 instances)", [] {
    std::mt19937_64 rng(8);
    double worst = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
      const int k = 2 + inst % 4;
      const NetworkConfig cfg = uniform_net(k, 1, 1, 1, std::pow(10.0, (inst % 4) * 1.0));
      const ChannelRealization ch = draw_channel(cfg, rng);
      CMatrix t = random_matrix(rng, k, k);
      for (int j = 0; j < k; ++j) t.row(j) *= std::sqrt(cfg.power(j)) / t.row(j).norm();
      const RateReport r = evaluate_rates(cfg, ch, t);
      for (int u = 0; u < k; ++u) worst = std::max(worst, std::abs(r.per_user[u] - sinr_rate(ch.matrix(), t, u)));
    }
    return Verdict{worst <= 1e-9, "worst per-user error " + fmt(worst) + " bits"};
  });

  report(9, "rerunning the sweep gives a byte-identical CSV", [&] {
    if (status_a != 0) return Verdict{false, "first run did not complete"};
    const unsigned threads_b = hw > 1 ? hw / 2 : 1;
    const int st = run_cli(csv_b, nullptr, threads_b);
    if (st != 0) return Verdict{false, "simulate exited with " + std::to_string(st)};
    const std::string a = slurp(csv_a), b = slurp(csv_b);
    return Verdict{!a.empty() && a == b, std::to_string(a.size()) + " bytes, threads " + std::to_string(hw) + " vs " +
                                             std::to_string(threads_b)};
  });

  report(10, "every scheme meets every per-TX budget in every sweep trial (slack 1e-9)", [&] {
    if (status_a != 0) return Verdict{false, "sweep did not complete"};
    const auto rows = read_dump(dump_a);
    double worst = 0.0;
    int flagged = 0;
    for (const auto& r : rows) {
      worst = std::max(worst, r.power_ratio);
      flagged += r.flagged;
    }
    return Verdict{rows.size() == 28000 && worst <= 1.0 + 1e-9,
                   std::to_string(rows.size()) + " records, max ||W_j||^2/P_j = " + fmt(worst) + ", flagged " +
                       std::to_string(flagged)};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
