// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Pass the CLI binary path as argv[1] so the self-test criterion
// can spawn it.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "idbounds/second_order.hpp"
#include "idbounds/selftest.hpp"

using namespace idbounds;

namespace {

struct Criterion {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

template <typename Fn>
Criterion timed(const std::string& name, Fn&& fn) {
  Criterion c;
  c.name = name;
  auto t0 = std::chrono::steady_clock::now();
  try {
    auto [pass, detail] = fn();
    c.pass = pass;
    c.detail = detail;
  } catch (const std::exception& e) {
    c.pass = false;
    c.detail = std::string("exception: ") + e.what();
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return c;
}

std::pair<bool, std::string> lemma3_expectation() {
  RngStream rng{CounterRng{160493}};
  Channel rand3 = selfcheck::random_channel(rng, 3, 3);
  std::vector<std::pair<std::string, Channel>> channels{
      {"bsc(0.1)", Channel::bsc(0.1)}, {"bsc(0.3)", Channel::bsc(0.3)}, {"rand3x3", rand3}};
  const int trials = 10000;
  int config = 0, failures = 0;
  double worst_margin = kInf;
  for (const auto& [cname, w] : channels) {
    Distribution p = Distribution::uniform(w.input_size());
    Distribution q = Distribution::uniform(w.output_size());
    for (double gamma : {0.0, std::log(2.0)}) {
      TruncationSet s = truncation_set(w, q, gamma);
      for (std::int64_t m : {25, 100}) {
        ++config;
        CounterRng root{900000ull + static_cast<std::uint64_t>(config)};
        double sum = 0.0, sumsq = 0.0;
        for (int t = 0; t < trials; ++t) {
          double d = soft_cover_sample(p, w, s, m, root.split(t).seed).distance;
          sum += d;
          sumsq += d * d;
        }
        double mean = sum / trials;
        double var = (sumsq / trials - mean * mean) * trials / (trials - 1.0);
        double se = std::sqrt(std::max(var, 0.0) / trials);
        double bound = soft_cover_bound(gamma, m);
        double margin = bound + 3.0 * se - mean;
        worst_margin = std::min(worst_margin, margin);
        if (margin < 0.0) ++failures;
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d/12 configs failed, worst margin %.3e", failures,
                worst_margin);
  return {failures == 0 && config == 12, buf};
}

std::pair<bool, std::string> lemma2_saddle() {
  RngStream rng{CounterRng{777001}};
  std::vector<Channel> channels{Channel::bsc(0.1)};
  for (int i = 0; i < 5; ++i) channels.push_back(selfcheck::random_channel(rng, 2, 3));
  double worst_gap = 0.0;
  double bsc_q_err = 0.0;
  int solves = 0;
  for (std::size_t ci = 0; ci < channels.size(); ++ci) {
    for (double eps : {0.1, 0.3}) {
      SaddleResult r = saddle_solve(channels[ci], eps, 1e-4);
      ++solves;
      worst_gap = std::max(worst_gap, std::fabs(r.gap));
      if (ci == 0)
        for (std::size_t y = 0; y < 2; ++y)
          bsc_q_err = std::max(bsc_q_err, std::fabs(r.q_star[y] - 0.5));
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d solves, worst |gap| %.3e, bsc q* err %.3e", solves,
                worst_gap, bsc_q_err);
  return {worst_gap <= 1e-4 && bsc_q_err <= 1e-3, buf};
}

std::pair<bool, std::string> theorem3_desk_scale() {
  const std::int64_t n = 10000;
  const double nd = static_cast<double>(n);
  Channel w = Channel::bsc(0.1);
  double p = 0.1;
  double capacity = std::log(2.0) + p * std::log(p) + (1.0 - p) * std::log(1.0 - p);
  double v = p * (1.0 - p) * std::pow(std::log((1.0 - p) / p), 2.0);
  double sqrt_v = std::sqrt(v);

  // converse side at eps + delta = 0.2 with the 1/sqrt(n) schedule
  FiniteNConverseOptions c_opts;
  c_opts.seed = 31337;
  FiniteNConverseReport con = finite_n_converse(w, n, 0.2, 0.0, c_opts);
  double eta = con.report.eta;  // 0.01
  double con_norm = (con.report.main_term - nd * capacity) / std::sqrt(nd);
  double con_target = sqrt_v * gaussian_quantile(0.2 + eta);
  bool con_ok = std::fabs(con_norm - con_target) <= 0.08;

  // achievability side at eps = 0.4 with the Monte Carlo spectrum
  AchievabilityOptions a_opts;
  a_opts.force_monte_carlo = true;
  a_opts.mc_samples = 1000000;
  a_opts.seed = 271828;
  AchievabilityReport ach = achievability_rate(w, n, 0.4, a_opts);
  double ach_norm =
      (ach.loglog_n + ach.f_constant * std::log(nd) - nd * capacity) / std::sqrt(nd);
  double ach_target = sqrt_v * gaussian_quantile(0.4);
  bool ach_ok = std::fabs(ach_norm - ach_target) <= 0.08;
  bool cdf_ok = std::fabs(ach.spectrum_cdf_at_r - 0.4) <= 0.04;

  // the schedule delta_n formula is reproduced exactly
  double delta_formula = (1.0 + std::log(2.0)) / std::log(nd) + 2.0 / (nd + 2.0);
  bool delta_ok = ach.delta_n_schedule == delta_formula;

  // bracket at matched eps = 0.4
  FiniteNConverseReport con04 = finite_n_converse(w, n, 0.4, 0.0, c_opts);
  bool bracket_ok = ach.loglog_n <= con04.report.bound_on_loglogN;

  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "conv %.4f vs %.4f | ach %.4f vs %.4f | F(R) %.4f | delta_n %s | bracket %s",
                con_norm, con_target, ach_norm, ach_target, ach.spectrum_cdf_at_r,
                delta_ok ? "exact" : "MISMATCH", bracket_ok ? "ok" : "VIOLATED");
  return {con_ok && ach_ok && cdf_ok && delta_ok && bracket_ok, buf};
}

std::pair<bool, std::string> selftest_via_cli(const char* cli_path) {
  if (!cli_path) return {false, "CLI path not provided on argv[1]"};
  std::string cmd = std::string(cli_path) + " --selftest > /tmp/idbounds_selftest_out.txt 2>&1";
  int rc = std::system(cmd.c_str());
  int code = WEXITSTATUS(rc);
  char buf[80];
  std::snprintf(buf, sizeof(buf), "exit code %d", code);
  return {code == 0, buf};
}

}  // namespace

int main(int argc, char** argv) {
  const char* cli_path = argc > 1 ? argv[1] : nullptr;
  std::vector<Criterion> results;

  results.push_back(timed("criterion-01 lemma1-sandwich-1000", [] {
    auto r = selfcheck::check_lemma1_sweep(1000, 2024);
    return std::pair<bool, std::string>{r.pass, r.detail};
  }));
  results.push_back(timed("criterion-02 neyman-pearson-oracle-200", [] {
    auto r = selfcheck::check_neyman_pearson_oracle(200, 7);
    return std::pair<bool, std::string>{r.pass, r.detail};
  }));
  results.push_back(timed("criterion-03 truncation-identity-500", [] {
    auto r = selfcheck::check_truncation_identity(500, 11);
    return std::pair<bool, std::string>{r.pass, r.detail};
  }));
  results.push_back(timed("criterion-04 lemma3-expectation-12x10k", lemma3_expectation));
  results.push_back(timed("criterion-05 lemma2-saddle-certificates", lemma2_saddle));
  results.push_back(timed("criterion-06 theorem1-code-sandwich", [] {
    auto r = selfcheck::check_theorem1_codes(23);
    return std::pair<bool, std::string>{r.pass, r.detail};
  }));
  results.push_back(timed("criterion-07 bsc-closed-forms", [] {
    auto r = selfcheck::check_closed_forms();
    return std::pair<bool, std::string>{r.pass, r.detail};
  }));
  results.push_back(timed("criterion-08 second-order-desk-scale", theorem3_desk_scale));
  results.push_back(timed("criterion-09 lemma5-arithmetic", [] {
    auto r = selfcheck::check_lemma5_arithmetic();
    return std::pair<bool, std::string>{r.pass, r.detail};
  }));
  results.push_back(timed("criterion-10 cli-selftest",
                          [cli_path] { return selftest_via_cli(cli_path); }));

  int failures = 0;
  for (const auto& c : results) {
    std::printf("%-42s [%s] (%.1fs) %s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL", c.seconds,
                c.detail.c_str());
    if (!c.pass) ++failures;
  }
  std::printf("%zu criteria, %d failed\n", results.size(), failures);
  return failures;
}
