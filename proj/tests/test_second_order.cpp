#include <doctest.h>

#include <cmath>

#include "idbounds/second_order.hpp"
#include "idbounds/selftest.hpp"

using namespace idbounds;

TEST_SUITE_BEGIN("second_order");

TEST_CASE("dispersion closed forms") {
  // binary symmetric channel: V = p(1-p) ln^2((1-p)/p), singleton polytope
  double p = 0.1;
  DispersionReport bsc = dispersion_analysis(Channel::bsc(p), 1e-10);
  double v_expected = p * (1.0 - p) * std::pow(std::log((1.0 - p) / p), 2.0);
  CHECK(bsc.v_min == doctest::Approx(v_expected).epsilon(1e-10));
  CHECK(bsc.v_max == doctest::Approx(v_expected).epsilon(1e-10));
  CHECK(bsc.pi_vertices.size() == 1);
  CHECK(bsc.pi_vertices[0][0] == doctest::Approx(0.5).epsilon(1e-9));

  // useless channel: the polytope is the whole simplex, V reaches zero
  DispersionReport flat = dispersion_analysis(Channel::useless(3, 2), 1e-10);
  CHECK(flat.capacity == doctest::Approx(0.0));
  CHECK(flat.v_min == doctest::Approx(0.0));
  CHECK(flat.pi_vertices.size() == 3);  // the point masses

  // noiseless channel: deterministic log ratios, zero variance
  DispersionReport id = dispersion_analysis(Channel::identity(2), 1e-10);
  CHECK(id.capacity == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(id.v_min == doctest::Approx(0.0));
  CHECK(id.v_max == doctest::Approx(0.0));
}

TEST_CASE("conditional and unconditional variances coincide on the polytope") {
  RngStream rng{CounterRng{12}};
  for (int i = 0; i < 15; ++i) {
    std::size_t nx = 2 + rng.next_word() % 3, ny = 2 + rng.next_word() % 3;
    Channel w = selfcheck::random_channel(rng, nx, ny);
    DispersionReport rep = dispersion_analysis(w, 1e-9);
    CHECK(rep.v_min <= rep.v_max + 1e-12);
    CHECK(std::fabs(rep.u_min - rep.v_min) <= 1e-8);
    CHECK(std::fabs(rep.u_max - rep.v_max) <= 1e-8);
    // every vertex reproduces the unique capacity-achieving output
    for (const auto& v : rep.pi_vertices) {
      Distribution out = output_distribution(v, w);
      for (std::size_t y = 0; y < ny; ++y)
        CHECK(out[y] == doctest::Approx(rep.output_dist[y]).epsilon(1e-8));
      for (std::size_t x = 0; x < nx; ++x) {
        if (v[x] > 1e-9) {
          bool active = false;
          for (std::size_t a : rep.active_inputs) active = active || a == x;
          CHECK(active);
        }
      }
    }
  }
}

TEST_CASE("v_eps branch selection") {
  DispersionReport rep;
  rep.v_min = 1.0;
  rep.v_max = 2.0;
  CHECK(v_eps(rep, 0.25) == doctest::Approx(1.0));
  CHECK(v_eps(rep, 0.5) == doctest::Approx(2.0));  // boundary joins the max branch
  CHECK(v_eps(rep, 0.75) == doctest::Approx(2.0));
  CHECK_THROWS_AS(v_eps(rep, 0.0), ValidationError);

  DispersionReport bsc = dispersion_analysis(Channel::bsc(0.1), 1e-9);
  CHECK(v_eps(bsc, 0.2) == doctest::Approx(v_eps(bsc, 0.8)).epsilon(1e-12));
}

TEST_CASE("gaussian quantile") {
  CHECK(gaussian_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(gaussian_quantile(0.8413447) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK_THROWS_AS(gaussian_quantile(0.0), ValidationError);
  CHECK_THROWS_AS(gaussian_quantile(1.0), ValidationError);

  // round trip against the independent series oracle
  RngStream rng{CounterRng{61}};
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double p = 1e-6 + (1.0 - 2e-6) * rng.next_uniform();
    double x = gaussian_quantile(p);
    double back = static_cast<double>(selfcheck::oracle_normal_cdf_series(x));
    worst = std::max(worst, std::fabs(back - p));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("second-order coefficient") {
  // eps = 1/2 gives zero regardless of the dispersion
  CHECK(second_order_id_capacity(Channel::bsc(0.1), 0.5) == doctest::Approx(0.0).epsilon(1e-10));

  // frozen composition of the closed forms
  double expected = 0.3 * std::log(9.0) * gaussian_quantile(0.1);
  double got = second_order_id_capacity(Channel::bsc(0.1), 0.1);
  CHECK(got == doctest::Approx(expected).epsilon(1e-9));
  CHECK(got == doctest::Approx(-0.844801).epsilon(1e-4));

  // quantile sign drives the coefficient sign
  CHECK(second_order_id_capacity(Channel::bsc(0.1), 0.3) < 0.0);
  CHECK(second_order_id_capacity(Channel::bsc(0.1), 0.7) > 0.0);

  // zero dispersion violates the theorem hypothesis
  CHECK_THROWS_AS(second_order_id_capacity(Channel::identity(2), 0.3), ValidationError);
}

TEST_CASE("spectrum at n = 1 matches the single-letter step function") {
  Distribution u = Distribution::uniform(2);
  Channel w = Channel::bsc(0.1);
  SpectrumCDF s = spectrum_cdf(u, w, u, 1);
  REQUIRE(s.values.size() == 2);
  CHECK(s.values[0] == doctest::Approx(std::log(0.2)).epsilon(1e-12));
  CHECK(s.values[1] == doctest::Approx(std::log(1.8)).epsilon(1e-12));
  CHECK(s.probs[0] == doctest::Approx(0.1).epsilon(1e-12));

  // same step function as the divergence engine sees
  DsResult ds = ds_epsilon(Distribution(joint(u, w).flat()), Distribution(joint(u, u).flat()),
                           0.05);
  CHECK(s.ds_at(0.05) == doctest::Approx(ds.value).epsilon(1e-12));
}

TEST_CASE("spectrum two-fold convolution by hand") {
  Distribution u = Distribution::uniform(2);
  SpectrumCDF s = spectrum_cdf(u, Channel::bsc(0.1), u, 2);
  REQUIRE(s.values.size() == 3);
  CHECK(s.values[0] == doctest::Approx(std::log(0.2)).epsilon(1e-12));
  CHECK(s.values[1] == doctest::Approx(0.5 * (std::log(0.2) + std::log(1.8))).epsilon(1e-12));
  CHECK(s.values[2] == doctest::Approx(std::log(1.8)).epsilon(1e-12));
  CHECK(s.probs[0] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(s.probs[1] == doctest::Approx(0.18).epsilon(1e-12));
  CHECK(s.probs[2] == doctest::Approx(0.81).epsilon(1e-12));
}

TEST_CASE("spectrum convolution moments") {
  RngStream rng{CounterRng{47}};
  for (int i = 0; i < 10; ++i) {
    std::size_t nx = 2 + rng.next_word() % 2, ny = 2 + rng.next_word() % 2;
    Channel w = selfcheck::random_channel(rng, nx, ny);
    Distribution p = selfcheck::random_distribution(rng, nx);
    Distribution q = selfcheck::random_distribution(rng, ny);
    SpectrumCDF s1 = spectrum_cdf(p, w, q, 1);
    std::int64_t n = 2 + static_cast<std::int64_t>(rng.next_word() % 30);
    SpectrumCDF sn = spectrum_cdf(p, w, q, n);
    // normalized mean is preserved; normalized variance scales as 1/n
    CHECK(sn.mean() == doctest::Approx(s1.mean()).epsilon(1e-9));
    CHECK(sn.variance() ==
          doctest::Approx(s1.variance() / static_cast<double>(n)).epsilon(1e-9));
    // cumulative probabilities are nondecreasing and end at one
    for (std::size_t l = 1; l < sn.cum.size(); ++l) CHECK(sn.cum[l] >= sn.cum[l - 1]);
    CHECK(sn.cum.back() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("monte carlo spectrum is consistent with the exact one") {
  Distribution u = Distribution::uniform(2);
  Channel w = Channel::bsc(0.1);
  std::int64_t n = 30;
  SpectrumCDF dp = spectrum_cdf(u, w, u, n);
  SpectrumCDF mc = spectrum_cdf(u, w, u, n, SpectrumMode::mc(200000, 987));
  // compare CDFs at every exact level within 3 binomial standard errors
  for (std::size_t l = 0; l < dp.values.size(); ++l) {
    double f = dp.cum[l];
    double fhat = mc.cdf_at(dp.values[l] + 1e-12);
    double se = std::sqrt(std::max(f * (1.0 - f), 1e-12) / 200000.0);
    CHECK(std::fabs(fhat - f) <= 3.0 * se + 1e-9);
  }
}

TEST_CASE("infinite levels propagate as sentinels") {
  // reference with a zero-probability output: all pairs hitting it sit at +inf
  Distribution q({1.0, 0.0});
  SpectrumCDF s = spectrum_cdf(Distribution::uniform(2), Channel::bsc(0.1), q, 2);
  REQUIRE(!s.values.empty());
  CHECK(s.values.back() == kInf);
  // finite part: both letters land on output 0, log(W(0|x)/1) summed
  CHECK(s.cdf_at(0.0) == doctest::Approx(0.25).epsilon(1e-12));  // (0.5)^2 finite mass
  CHECK(s.ds_at(0.9) == kInf);
  CHECK(std::isfinite(s.ds_at(0.2)));
}

TEST_CASE("finite-n converse approaches the gaussian approximation") {
  Channel w = Channel::bsc(0.1);
  double p = 0.1;
  double capacity = std::log(2.0) + p * std::log(p) + (1.0 - p) * std::log(1.0 - p);
  double sqrt_v = std::sqrt(p * (1.0 - p)) * std::log((1.0 - p) / p);
  double prev_err = kInf;
  for (std::int64_t n : {100, 400, 1600}) {
    FiniteNConverseReport rep = finite_n_converse(w, n, 0.2, 0.0);
    double eta = rep.report.eta;
    double norm = (rep.report.main_term - static_cast<double>(n) * capacity) /
                  std::sqrt(static_cast<double>(n));
    double target = sqrt_v * gaussian_quantile(0.2 + eta);
    double err = std::fabs(norm - target);
    // discreteness of the binomial spectrum contributes ~log(9)/sqrt(n)
    CHECK(err <= 3.0 * std::log(9.0) / std::sqrt(static_cast<double>(n)) + 0.05);
    if (n == 1600) CHECK(err <= prev_err + 0.05);
    prev_err = err;
  }
}

TEST_CASE("spectrum cap instructs the sampler") {
  RngStream rng{CounterRng{3}};
  Channel w = selfcheck::random_channel(rng, 3, 3);
  Distribution p = selfcheck::random_distribution(rng, 3);
  Distribution q = selfcheck::random_distribution(rng, 3);
  SpectrumMode tight = SpectrumMode::dp(50);
  CHECK_THROWS_AS(spectrum_cdf(p, w, q, 40, tight), CapExceededError);
}

TEST_CASE("lemma5 parameter engine fixed arithmetic") {
  selfcheck::CheckResult r = selfcheck::check_lemma5_arithmetic();
  CHECK_MESSAGE(r.pass, r.detail);

  // named constraint in the failure message
  Lemma5Params bad = Lemma5Params::desk(2.0, 4.0, 2.0, 4.0, 0.1, 0.5, 100.0, 100);
  CHECK_THROWS_WITH_AS(bad.validate(),
                       "Lemma5Params: constraint kappa*log(1/tau - 1) > log 2 + 1 violated "
                       "(1.098612 <= 1.693147)",
                       ValidationError);

  // proviso gate: a flat spectrum with all mass below log K makes eps_bound = ab
  Lemma5Params p = Lemma5Params::desk(2.0, 4.0, 2.0, 4.0, 0.05, 0.9, 100.0, 100);
  SpectrumCDF flat;
  flat.values = {10.0};
  flat.probs = {1.0};
  flat.cum = {1.0};
  flat.n = 1;
  Lemma5CodePoint pt = lemma5_code_point(p, flat);
  CHECK(pt.eps_bound == doctest::Approx(0.0));
  CHECK_FALSE(pt.valid);  // delta_excess = 16 * ceil(100/c)/100 >= 1
}

TEST_CASE("achievability schedule formulas") {
  std::int64_t n = 400;
  AchievabilityOptions opts;
  opts.seed = 5;
  AchievabilityReport rep = achievability_rate(Channel::bsc(0.1), n, 0.4, opts);
  double nd = static_cast<double>(n);
  CHECK(rep.schedule.a == doctest::Approx(1.0 + 2.0 / nd));
  CHECK(rep.schedule.a_prime == doctest::Approx(nd + 2.0));
  CHECK(rep.schedule.tau == doctest::Approx(1.0 / (nd + 2.0)));
  CHECK(rep.schedule.kappa == doctest::Approx((1.0 + std::log(2.0)) / std::log(nd)));
  CHECK(rep.delta_n_schedule ==
        doctest::Approx((1.0 + std::log(2.0)) / std::log(nd) + 2.0 / (nd + 2.0)).epsilon(1e-15));
  CHECK(rep.eps_n <= std::pow(1.0 + 2.0 / nd, 2.0) * (rep.spectrum_cdf_at_r + 1e-12));
  CHECK(rep.loglog_n / nd <= rep.rate_r);
  CHECK(rep.f_constant > 0.0);

  // delta_n decreases in n
  AchievabilityReport rep2 = achievability_rate(Channel::bsc(0.1), 4 * n, 0.4, opts);
  CHECK(rep2.delta_n_schedule < rep.delta_n_schedule);

  // below the kappa < 1 threshold the schedule is infeasible
  CHECK_THROWS_AS(achievability_rate(Channel::bsc(0.1), 3, 0.4, opts), ValidationError);
  // zero dispersion is rejected
  CHECK_THROWS_AS(achievability_rate(Channel::identity(2), 100, 0.4, opts), ValidationError);
}

TEST_CASE("finite-n converse at n = 1 reduces to the single-letter relaxation") {
  Channel w = Channel::bsc(0.1);
  FiniteNConverseOptions opts;
  opts.eta = 0.25;
  FiniteNConverseReport rep = finite_n_converse(w, 1, 0.2, 0.0, opts);
  CapacityResult ba = blahut_arimoto(w, 1e-8);
  double expected_main = sup_ds_over_inputs(w, ba.output_dist, 0.2 + 0.0 + 0.25).value;
  CHECK(rep.report.main_term == doctest::Approx(expected_main).epsilon(1e-10));
  CHECK(rep.report.slack.loglog_alphabet == doctest::Approx(std::log(std::log(2.0))));
  CHECK(rep.report.slack.eta_term == doctest::Approx(2.0 * std::log(4.0)));
  CHECK(rep.composition_invariant);

  // the default 1/sqrt(n) schedule needs eps + delta + eta < 1
  CHECK_THROWS_AS(finite_n_converse(w, 1, 0.2, 0.0), ValidationError);
}

TEST_CASE("finite-n converse enumerates compositions on asymmetric channels") {
  Channel w({{0.8, 0.15, 0.05}, {0.1, 0.6, 0.3}});
  FiniteNConverseOptions opts;
  opts.eta = 0.1;
  FiniteNConverseReport rep = finite_n_converse(w, 12, 0.2, 0.1, opts);
  CHECK_FALSE(rep.composition_invariant);
  CHECK_FALSE(rep.heuristic);
  REQUIRE(rep.witness_composition.size() == 2);
  CHECK(rep.witness_composition[0] + rep.witness_composition[1] == 12);

  // brute-force the max over compositions via the mc-free per-composition dp
  double best = -kInf;
  CapacityResult ba = blahut_arimoto(w, 1e-8);
  for (std::int64_t t = 0; t <= 12; ++t) {
    // spectrum of t letters from row 0 plus (12 - t) from row 1
    std::vector<std::pair<double, double>> acc{{0.0, 1.0}};
    auto convolve_row = [&](std::size_t x, std::int64_t count) {
      for (std::int64_t i = 0; i < count; ++i) {
        std::vector<std::pair<double, double>> next;
        for (const auto& [v, pr] : acc)
          for (std::size_t y = 0; y < 3; ++y)
            if (w(x, y) > 0.0)
              next.emplace_back(v + log_ratio(w(x, y), ba.output_dist[y]), pr * w(x, y));
        std::sort(next.begin(), next.end());
        std::vector<std::pair<double, double>> merged;
        for (const auto& item : next) {
          if (!merged.empty() && std::fabs(merged.back().first - item.first) <= 1e-12)
            merged.back().second += item.second;
          else
            merged.push_back(item);
        }
        acc = std::move(merged);
      }
    };
    convolve_row(0, t);
    convolve_row(1, 12 - t);
    double cum = 0.0, ds = kInf;
    for (const auto& [v, pr] : acc) {
      cum += pr;
      if (cum > 0.2 + 0.1 + 0.1) {
        ds = v;
        break;
      }
    }
    best = std::max(best, ds);
  }
  CHECK(rep.report.main_term == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("converse dominates achievability at matched blocklengths") {
  Channel w = Channel::bsc(0.1);
  for (std::int64_t n : {100, 400}) {
    AchievabilityOptions a_opts;
    a_opts.seed = 11;
    AchievabilityReport ach = achievability_rate(w, n, 0.3, a_opts);
    FiniteNConverseOptions c_opts;
    c_opts.seed = 11;
    FiniteNConverseReport con = finite_n_converse(w, n, 0.3, 0.0, c_opts);
    CHECK(con.report.bound_on_loglogN >= ach.loglog_n);
  }
}

TEST_SUITE_END();
