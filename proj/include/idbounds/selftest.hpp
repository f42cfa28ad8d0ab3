// Verification-only routines: independent oracles (never used by the
// implementation paths they check) and the fast self-test battery behind
// `idbounds --selftest`.  The slow acceptance checks live in the
// acceptance test binary and reuse these helpers.

#ifndef IDBOUNDS_SELFTEST_HPP
#define IDBOUNDS_SELFTEST_HPP

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "idbounds/core.hpp"
#include "idbounds/idcode.hpp"
#include "idbounds/minimax.hpp"
#include "idbounds/resolvability.hpp"
#include "idbounds/rng.hpp"
#include "idbounds/second_order.hpp"
#include "idbounds/testing.hpp"

namespace idbounds {
namespace selfcheck {

// ---------------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------------

/// Brute-force optimal type-II error: scans every log-ratio level as a
/// threshold with a randomization grid, keeping the best feasible test.
/// Pure primal search, written directly from the test definition.
inline double oracle_beta_threshold_grid(const std::vector<double>& p,
                                         const std::vector<double>& q, double eps,
                                         int grid = 1000) {
  std::vector<double> ratios;
  for (std::size_t z = 0; z < p.size(); ++z) {
    if (p[z] <= 0.0 && q[z] <= 0.0) continue;
    ratios.push_back(log_ratio(p[z], q[z]));
  }
  std::sort(ratios.begin(), ratios.end());
  ratios.erase(std::unique(ratios.begin(), ratios.end()), ratios.end());

  double best = 1.0;
  for (double gamma : ratios) {
    for (int g = 0; g <= grid; ++g) {
      double theta = static_cast<double>(g) / static_cast<double>(grid);
      double type1 = 0.0, type2 = 0.0;
      for (std::size_t z = 0; z < p.size(); ++z) {
        if (p[z] <= 0.0 && q[z] <= 0.0) continue;
        double lr = log_ratio(p[z], q[z]);
        double reject;
        if (lr < gamma)
          reject = 1.0;
        else if (lr == gamma)
          reject = theta;
        else
          reject = 0.0;
        type1 += p[z] * reject;
        type2 += q[z] * (1.0 - reject);
      }
      if (type1 <= eps + 1e-12) best = std::min(best, type2);
    }
  }
  return best;
}

/// Scalar dual of the testing LP evaluated at its breakpoints; a second
/// independent route whose value certifies the primal optimum exactly.
inline double oracle_beta_dual(const std::vector<double>& p, const std::vector<double>& q,
                               double eps) {
  std::vector<double> lambdas{0.0};
  double top = 0.0;
  for (std::size_t z = 0; z < p.size(); ++z) {
    if (p[z] > 0.0) {
      lambdas.push_back(q[z] / p[z]);
      top = std::max(top, q[z] / p[z]);
    }
  }
  lambdas.push_back(top + 1.0);
  double best = 0.0;
  for (double lam : lambdas) {
    double v = lam * (1.0 - eps);
    for (std::size_t z = 0; z < p.size(); ++z) v -= std::max(0.0, lam * p[z] - q[z]);
    best = std::max(best, v);
  }
  return best;
}

/// High-precision standard normal CDF from the erf Taylor series in long
/// double (adequate for |x| <= 6); independent of std::erfc.
inline long double oracle_normal_cdf_series(long double x) {
  long double t = x / std::sqrt(2.0L);
  long double sign = t < 0 ? -1.0L : 1.0L;
  t = std::fabs(t);
  long double term = t, sum = t;
  for (int k = 1; k < 300; ++k) {
    term *= -t * t / static_cast<long double>(k);
    long double add = term / static_cast<long double>(2 * k + 1);
    sum += add;
    if (std::fabs(add) < 1e-24L * std::fabs(sum) && k > 8) break;
  }
  long double erf = sign * 2.0L / std::sqrt(3.14159265358979323846264338328L) * sum;
  return 0.5L * (1.0L + erf);
}

// ---------------------------------------------------------------------------
// Deterministic random instances
// ---------------------------------------------------------------------------

inline Distribution random_distribution(RngStream& rng, std::size_t k, bool allow_zeros = false) {
  std::vector<double> v(k);
  for (double& e : v) {
    double u = rng.next_uniform();
    e = allow_zeros && u < 0.15 ? 0.0 : -std::log(std::max(u, 1e-300));
  }
  double sum = 0.0;
  for (double e : v) sum += e;
  if (sum <= 0.0) v[0] = 1.0;
  double s2 = 0.0;
  for (double e : v) s2 += e;
  for (double& e : v) e /= s2;
  return Distribution(v);
}

inline Channel random_channel(RngStream& rng, std::size_t nx, std::size_t ny,
                              bool allow_zeros = false) {
  std::vector<std::vector<double>> rows;
  rows.reserve(nx);
  for (std::size_t x = 0; x < nx; ++x)
    rows.push_back(random_distribution(rng, ny, allow_zeros).probs());
  return Channel(rows);
}

// ---------------------------------------------------------------------------
// Self-test battery
// ---------------------------------------------------------------------------

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

inline CheckResult check_lemma1_sweep(int instances = 1000, std::uint64_t seed = 2024) {
  RngStream rng{CounterRng{seed}};
  int failures = 0;
  double worst_margin = kInf;
  for (int i = 0; i < instances; ++i) {
    std::size_t k = 2 + static_cast<std::size_t>(rng.next_word() % 7);  // up to 8
    Distribution p = random_distribution(rng, k, true);
    Distribution q = random_distribution(rng, k, true);
    double eps = 0.9 * rng.next_uniform();
    double zeta = 0.05 + rng.next_uniform() * (1.0 - eps - 0.1) * 0.8;
    if (!(zeta > 0.0 && zeta < 1.0 - eps)) zeta = 0.5 * (1.0 - eps);
    Lemma1Report rep = lemma1_check(p, q, eps, zeta);
    if (!rep.holds) ++failures;
    if (std::isfinite(rep.upper) && std::isfinite(rep.neg_log_beta))
      worst_margin = std::min(worst_margin, rep.upper - rep.neg_log_beta);
  }
  std::ostringstream d;
  d << failures << "/" << instances << " failures";
  return {"lemma1-sandwich", failures == 0, d.str()};
}

inline CheckResult check_neyman_pearson_oracle(int instances = 200, std::uint64_t seed = 7) {
  RngStream rng{CounterRng{seed}};
  int failures = 0;
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    std::size_t k = 2 + static_cast<std::size_t>(rng.next_word() % 3);  // up to 4
    Distribution p = random_distribution(rng, k, true);
    Distribution q = random_distribution(rng, k, true);
    double eps = 0.95 * rng.next_uniform();
    double impl = beta_epsilon(p, q, eps).beta;
    double dual = oracle_beta_dual(p.probs(), q.probs(), eps);
    double grid = oracle_beta_threshold_grid(p.probs(), q.probs(), eps);
    double err = std::fabs(impl - dual);
    worst = std::max(worst, err);
    // the grid test is primal-feasible, so it can only sit above the optimum
    if (err > 1e-9 || impl > grid + 1e-9) ++failures;
  }
  std::ostringstream d;
  d << failures << "/" << instances << " failures, worst dual gap " << worst;
  return {"neyman-pearson-oracle", failures == 0, d.str()};
}

inline CheckResult check_truncation_identity(int instances = 500, std::uint64_t seed = 11) {
  RngStream rng{CounterRng{seed}};
  int failures = 0;
  for (int i = 0; i < instances; ++i) {
    std::size_t nx = 2 + static_cast<std::size_t>(rng.next_word() % 3);
    std::size_t ny = 2 + static_cast<std::size_t>(rng.next_word() % 3);
    Channel w = random_channel(rng, nx, ny, true);
    Distribution p = random_distribution(rng, nx, true);
    TruncationSet s{};
    if (rng.next_uniform() < 0.5) {
      Distribution q = random_distribution(rng, ny, true);
      double gamma = -1.0 + 2.0 * rng.next_uniform();
      s = truncation_set(w, q, gamma);
    } else {
      std::vector<std::uint8_t> mask(nx * ny);
      for (auto& m : mask) m = rng.next_uniform() < 0.5 ? 1 : 0;
      s = TruncationSet::explicit_mask(std::move(mask), nx, ny);
    }
    if (!truncation_error_check(p, w, s).equal) ++failures;
  }
  std::ostringstream d;
  d << failures << "/" << instances << " failures";
  return {"truncation-identity", failures == 0, d.str()};
}

inline CheckResult check_theorem1_codes(std::uint64_t seed = 23) {
  RngStream rng{CounterRng{seed}};
  int checked = 0, failures = 0;
  // searched codes across a small target sweep plus random N = 3 codes
  std::vector<Channel> channels{Channel::bsc(0.1), Channel::bsc(0.25), Channel::identity(2)};
  for (const auto& w : channels) {
    for (double eps : {0.1, 0.3}) {
      for (double delta : {0.1, 0.3}) {
        SearchResult sr = search_codes(w, eps, delta, SearchBudget{4000, 0}, 99);
        for (double gamma : {-0.5, 0.0, 0.7}) {
          for (std::int64_t m : {1, 2}) {
            Theorem1CodeCheck chk =
                verify_theorem1_against_code(sr.code, w, Distribution::uniform(2), gamma, m);
            if (chk.applicable) {
              ++checked;
              if (!chk.holds) ++failures;
            }
          }
        }
      }
    }
    // arbitrary three-message codes; their exact errors satisfy the bound
    for (int rep = 0; rep < 40; ++rep) {
      IDCode code;
      for (int i = 0; i < 3; ++i) {
        code.encoders.push_back(random_distribution(rng, 2));
        std::vector<std::size_t> region;
        for (std::size_t y = 0; y < 2; ++y)
          if (rng.next_uniform() < 0.5) region.push_back(y);
        code.acceptors.push_back(region);
      }
      for (double gamma : {-0.3, 0.0, 0.5}) {
        Theorem1CodeCheck chk =
            verify_theorem1_against_code(code, w, Distribution::uniform(2), gamma, 1);
        if (chk.applicable) {
          ++checked;
          if (!chk.holds) ++failures;
        }
      }
    }
  }
  std::ostringstream d;
  d << failures << "/" << checked << " applicable checks failed";
  return {"theorem1-code-sandwich", failures == 0 && checked > 0, d.str()};
}

inline CheckResult check_closed_forms() {
  // binary closed forms, computed here from first principles
  double p = 0.1;
  double h = -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
  double c_expected = std::log(2.0) - h;
  double v_expected = p * (1.0 - p) * std::pow(std::log((1.0 - p) / p), 2.0);

  CapacityResult cap = blahut_arimoto(Channel::bsc(p), 1e-10);
  DispersionReport disp = dispersion_analysis(Channel::bsc(p), 1e-10);
  bool ok = std::fabs(cap.capacity - c_expected) <= 1e-8 &&
            std::fabs(disp.v_min - v_expected) <= 1e-8 &&
            std::fabs(disp.v_max - v_expected) <= 1e-8;
  std::ostringstream d;
  d << "capacity err " << std::fabs(cap.capacity - c_expected) << ", dispersion err "
    << std::fabs(disp.v_min - v_expected);
  return {"bsc-closed-forms", ok, d.str()};
}

inline CheckResult check_lemma5_arithmetic() {
  bool ok = true;
  std::string why;
  // constraint failure at kappa = 0.5, tau = 0.1
  try {
    Lemma5Params bad = Lemma5Params::desk(2.0, 4.0, 2.0, 4.0, 0.1, 0.5, 100.0, 100);
    bad.validate();
    ok = false;
    why = "kappa=0.5,tau=0.1 unexpectedly accepted";
  } catch (const ValidationError&) {
  }
  // constraint pass at kappa = 0.9, tau = 0.05
  try {
    Lemma5Params good = Lemma5Params::desk(2.0, 4.0, 2.0, 4.0, 0.05, 0.9, 100.0, 100);
    good.validate();
  } catch (const ValidationError& e) {
    ok = false;
    why = std::string("kappa=0.9,tau=0.05 rejected: ") + e.what();
  }
  // N = floor(e^{tau M} / (M e)) = 81 at tau = 0.1, M = 100
  {
    Lemma5Params p = Lemma5Params::desk(2.0, 4.0, 2.0, 4.0, 0.1, 0.9, 100.0, 100);
    SpectrumCDF trivial;
    trivial.values = {0.0};
    trivial.probs = {1.0};
    trivial.cum = {1.0};
    trivial.n = 1;
    Lemma5CodePoint pt = lemma5_code_point(p, trivial);
    if (pt.n_messages != 81) {
      ok = false;
      why += " N=" + std::to_string(pt.n_messages) + " (expected 81)";
    }
  }
  return {"lemma5-arithmetic", ok, why.empty() ? "three fixed cases" : why};
}

inline CheckResult check_module_invariants(std::uint64_t seed = 5150) {
  RngStream rng{CounterRng{seed}};
  int failures = 0;
  std::ostringstream why;

  for (int i = 0; i < 100; ++i) {
    std::size_t nx = 2 + static_cast<std::size_t>(rng.next_word() % 3);
    std::size_t ny = 2 + static_cast<std::size_t>(rng.next_word() % 3);
    Channel w = random_channel(rng, nx, ny, true);
    Distribution p = random_distribution(rng, nx, true);

    // output distribution is a distribution; joint marginals match
    Distribution out = output_distribution(p, w);
    JointDistribution pw = joint(p, w);
    Distribution my = pw.marginal_y();
    for (std::size_t y = 0; y < ny; ++y)
      if (std::fabs(my[y] - out[y]) > 1e-12) ++failures;

    // metric properties of the variational distance
    Distribution a = random_distribution(rng, ny, true);
    Distribution b = random_distribution(rng, ny, true);
    double dab = variational_distance(a, b);
    double dba = variational_distance(b, a);
    if (std::fabs(dab - dba) > 1e-15 || variational_distance(a, a) > 1e-12) ++failures;
    double dac = variational_distance(a, out);
    double dcb = variational_distance(out, b);
    if (dab > dac + dcb + 1e-12) ++failures;

    // beta monotone in eps, achieved type-I within budget
    Distribution q = random_distribution(rng, nx, true);
    double e1 = 0.5 * rng.next_uniform(), e2 = e1 + 0.3 * rng.next_uniform();
    BetaResult b1 = beta_epsilon(p, q, e1);
    BetaResult b2 = beta_epsilon(p, q, e2);
    if (b1.type1 > e1 + 1e-12 || b2.type1 > e2 + 1e-12) ++failures;
    if (b2.beta > b1.beta + 1e-12) ++failures;
  }

  // m-type bookkeeping
  for (int i = 0; i < 50; ++i) {
    std::int64_t m = 1 + static_cast<std::int64_t>(rng.next_word() % 30);
    Distribution p = random_distribution(rng, 2);
    SoftCoverTrial t = soft_cover_sample(p, Channel::bsc(0.2),
                                         truncation_set(Channel::bsc(0.2),
                                                        Distribution::uniform(2), 0.3),
                                         m, rng.next_word());
    std::int64_t sum = 0;
    for (auto c : t.mtype.counts()) sum += c;
    if (sum != m) ++failures;
    if (t.distance < 0.0 || t.distance > 1.0) ++failures;
  }

  why << failures << " invariant failures";
  return {"module-invariants", failures == 0, why.str()};
}

/// The fast battery behind `idbounds --selftest`.
inline std::vector<CheckResult> run_selftest() {
  std::vector<CheckResult> res;
  res.push_back(check_lemma1_sweep());
  res.push_back(check_neyman_pearson_oracle());
  res.push_back(check_truncation_identity());
  res.push_back(check_theorem1_codes());
  res.push_back(check_closed_forms());
  res.push_back(check_lemma5_arithmetic());
  res.push_back(check_module_invariants());
  return res;
}

}  // namespace selfcheck
}  // namespace idbounds

#endif  // IDBOUNDS_SELFTEST_HPP
