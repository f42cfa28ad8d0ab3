#include <doctest.h>

#include <cmath>

#include "idbounds/idcode.hpp"
#include "idbounds/minimax.hpp"
#include "idbounds/selftest.hpp"

using namespace idbounds;

TEST_SUITE_BEGIN("idcode");

namespace {

IDCode two_message_code() {
  IDCode code;
  code.encoders = {Distribution::point_mass(2, 0), Distribution::point_mass(2, 1)};
  code.acceptors = {{0}, {1}};
  return code;
}

}  // namespace

TEST_CASE("evaluate fixed cases") {
  IDCode code = two_message_code();

  IDCodeEvaluation noiseless = evaluate(code, Channel::identity(2));
  CHECK(noiseless.type1 == doctest::Approx(0.0));
  CHECK(noiseless.type2 == doctest::Approx(0.0));
  CHECK(noiseless.pair_defined);

  IDCodeEvaluation noisy = evaluate(code, Channel::bsc(0.1));
  CHECK(noisy.type1 == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(noisy.type2 == doctest::Approx(0.1).epsilon(1e-14));

  // accept-everything decoders never miss but always confuse
  IDCode everything = code;
  everything.acceptors = {{0, 1}, {0, 1}};
  IDCodeEvaluation ev = evaluate(everything, Channel::bsc(0.1));
  CHECK(ev.type1 == doctest::Approx(0.0));
  CHECK(ev.type2 == doctest::Approx(1.0));

  // single-message codes have no confusion pair
  IDCode solo;
  solo.encoders = {Distribution::uniform(2)};
  solo.acceptors = {{0, 1}};
  IDCodeEvaluation s = evaluate(solo, Channel::bsc(0.1));
  CHECK_FALSE(s.pair_defined);
  CHECK(s.type2 == doctest::Approx(0.0));
}

TEST_CASE("evaluate agrees with the joint-distribution route") {
  RngStream rng{CounterRng{111}};
  for (int i = 0; i < 100; ++i) {
    std::size_t nx = 2 + rng.next_word() % 2, ny = 2 + rng.next_word() % 3;
    Channel w = selfcheck::random_channel(rng, nx, ny, true);
    IDCode code;
    std::size_t n = 2 + rng.next_word() % 3;
    for (std::size_t m = 0; m < n; ++m) {
      code.encoders.push_back(selfcheck::random_distribution(rng, nx, true));
      std::vector<std::size_t> region;
      for (std::size_t y = 0; y < ny; ++y)
        if (rng.next_uniform() < 0.5) region.push_back(y);
      code.acceptors.push_back(region);
    }
    IDCodeEvaluation direct = evaluate(code, w);

    double type1 = 0.0, type2 = 0.0;
    for (std::size_t i1 = 0; i1 < n; ++i1) {
      JointDistribution j = joint(code.encoders[i1], w);
      Distribution out = j.marginal_y();
      double inside = 0.0;
      for (std::size_t y : code.acceptors[i1]) inside += out[y];
      type1 = std::max(type1, 1.0 - inside);
      for (std::size_t j2 = 0; j2 < n; ++j2) {
        if (i1 == j2) continue;
        double hit = 0.0;
        for (std::size_t y : code.acceptors[j2]) hit += out[y];
        type2 = std::max(type2, hit);
      }
    }
    CHECK(direct.type1 == doctest::Approx(type1).epsilon(1e-12));
    CHECK(direct.type2 == doctest::Approx(type2).epsilon(1e-12));
  }
}

TEST_CASE("m-canonical membership") {
  IDCode code = two_message_code();
  CHECK(is_m_canonical(code, 1));
  CHECK(is_m_canonical(code, 7));

  IDCode half;
  half.encoders = {Distribution({0.5, 0.5})};
  half.acceptors = {{0}};
  CHECK(is_m_canonical(half, 2));
  CHECK_FALSE(is_m_canonical(half, 3));
}

TEST_CASE("duplicate encoders in a canonical code force eps + delta >= 1") {
  IDCode dup;
  dup.encoders = {Distribution({0.5, 0.5}), Distribution({0.5, 0.5})};
  dup.acceptors = {{0}, {1}};
  auto pairs = duplicate_encoder_pairs(dup);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0] == std::pair<std::size_t, std::size_t>{0, 1});
  IDCodeEvaluation ev = evaluate(dup, Channel::bsc(0.15));
  CHECK(ev.type1 + ev.type2 >= 1.0 - 1e-12);

  // the same contradiction on random duplicate-encoder codes
  RngStream rng{CounterRng{222}};
  for (int i = 0; i < 50; ++i) {
    Channel w = selfcheck::random_channel(rng, 2, 3, true);
    Distribution enc = selfcheck::random_distribution(rng, 2, true);
    std::vector<std::size_t> d1, d2;
    for (std::size_t y = 0; y < 3; ++y) {
      if (rng.next_uniform() < 0.5) d1.push_back(y);
      if (rng.next_uniform() < 0.5) d2.push_back(y);
    }
    IDCode c;
    c.encoders = {enc, enc};
    c.acceptors = {d1, d2};
    IDCodeEvaluation ev2 = evaluate(c, w);
    CHECK(ev2.type1 + ev2.type2 >= 1.0 - 1e-12);
  }
}

TEST_CASE("search finds the noiseless two-message code at zero error") {
  SearchResult r = search_codes(Channel::identity(2), 0.0, 0.0, SearchBudget{2000, 0}, 5);
  CHECK(r.code.size() >= 2);
  CHECK(r.evaluation.type1 <= 1e-12);
  CHECK(r.evaluation.type2 <= 1e-12);
}

TEST_CASE("search rejects the infinite-capacity regime") {
  CHECK_THROWS_AS(search_codes(Channel::bsc(0.1), 0.6, 0.5, SearchBudget{100, 0}, 1),
                  ValidationError);
}

TEST_CASE("searched codes meet their targets exactly") {
  RngStream rng{CounterRng{333}};
  for (int i = 0; i < 12; ++i) {
    Channel w = selfcheck::random_channel(rng, 2, 2 + rng.next_word() % 2, true);
    double eps = 0.05 + 0.4 * rng.next_uniform();
    double delta = 0.05 + 0.4 * rng.next_uniform();
    SearchResult r = search_codes(w, eps, delta, SearchBudget{3000, 0}, 17 + i);
    CHECK(r.evaluation.type1 <= eps + 1e-12);
    CHECK(r.evaluation.type2 <= delta + 1e-12);
    CHECK(r.code.size() >= 1);

    // separation: distinct messages keep far-apart output distributions
    for (std::size_t a = 0; a < r.code.size(); ++a) {
      for (std::size_t b = a + 1; b < r.code.size(); ++b) {
        double d = variational_distance(output_distribution(r.code.encoders[a], w),
                                        output_distribution(r.code.encoders[b], w));
        CHECK(d >= 1.0 - r.evaluation.type1 - r.evaluation.type2 - 1e-9);
      }
    }
  }
}

TEST_CASE("search size is monotone in the error budgets") {
  Channel w = Channel::bec(0.3);
  std::size_t prev = 0;
  for (double lvl : {0.05, 0.15, 0.3, 0.45}) {
    SearchResult r = search_codes(w, lvl, lvl, SearchBudget{4000, 0}, 404);
    CHECK(r.code.size() >= prev);
    prev = r.code.size();
  }
}

TEST_CASE("searched codes respect the single-shot converse") {
  // loglog N of every witness stays below the corollary bound, both on the
  // single-shot channel and on its two-letter extension
  Channel w = Channel::bsc(0.1);
  Channel w2 = product_channel(w, 2);
  for (const Channel* ch : {&w, &w2}) {
    for (double lvl : {0.2, 0.35}) {
      SearchResult r = search_codes(*ch, lvl, lvl, SearchBudget{6000, 0}, 777);
      if (r.code.size() < 2) continue;
      double loglog_n = std::log(std::log(static_cast<double>(r.code.size())));
      for (double eta : {0.05, 0.1}) {
        if (!(eta < 1.0 - 2 * lvl)) continue;
        ConverseReport rep = corollary1_bound(*ch, lvl, lvl, eta);
        CHECK(loglog_n <= rep.bound_on_loglogN);
      }
    }
  }
}

TEST_SUITE_END();
