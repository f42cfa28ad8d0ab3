// Explicit identification codes: exact worst-case error evaluation,
// M-canonicity checks, and a greedy randomized search that produces
// lower-bound witnesses for the optimal code size.

#ifndef IDBOUNDS_IDCODE_HPP
#define IDBOUNDS_IDCODE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "idbounds/core.hpp"
#include "idbounds/rng.hpp"

namespace idbounds {

/// An identification code: N stochastic encoders with (possibly
/// overlapping) acceptance regions, one per message.
struct IDCode {
  std::vector<Distribution> encoders;
  std::vector<std::vector<std::size_t>> acceptors;  // y-indices, any order

  std::size_t size() const { return encoders.size(); }
};

struct IDCodeEvaluation {
  double type1 = 0.0;  // max_i P_i W(D_i^c)
  double type2 = 0.0;  // max_{i != j} P_i W(D_j)
  std::size_t worst_type1_index = 0;
  std::pair<std::size_t, std::size_t> worst_pair{0, 0};
  bool pair_defined = false;  // false for single-message codes
};

namespace detail {

inline void check_code(const IDCode& code, const Channel& w) {
  check(code.size() >= 1, "IDCode: at least one message required");
  check(code.encoders.size() == code.acceptors.size(),
        "IDCode: encoders and acceptors must have equal length");
  for (const auto& e : code.encoders)
    check(e.size() == w.input_size(), "IDCode: encoder size does not match channel input");
  for (const auto& d : code.acceptors)
    for (std::size_t y : d)
      check(y < w.output_size(), "IDCode: acceptor index out of output range");
}

inline double region_mass(const Distribution& out, const std::vector<std::size_t>& region) {
  double m = 0.0;
  for (std::size_t y : region) m += out[y];
  return m;
}

}  // namespace detail

/// Exact worst-case errors by full enumeration over messages and ordered
/// pairs.  Single-message codes have no pair; type2 is reported as 0 with
/// pair_defined = false.
inline IDCodeEvaluation evaluate(const IDCode& code, const Channel& w) {
  detail::check_code(code, w);
  std::vector<Distribution> outputs;
  outputs.reserve(code.size());
  for (const auto& e : code.encoders) outputs.push_back(output_distribution(e, w));

  IDCodeEvaluation ev;
  for (std::size_t i = 0; i < code.size(); ++i) {
    double miss = 1.0 - detail::region_mass(outputs[i], code.acceptors[i]);
    if (miss > ev.type1) {
      ev.type1 = miss;
      ev.worst_type1_index = i;
    }
  }
  for (std::size_t i = 0; i < code.size(); ++i) {
    for (std::size_t j = 0; j < code.size(); ++j) {
      if (i == j) continue;
      double hit = detail::region_mass(outputs[i], code.acceptors[j]);
      if (!ev.pair_defined || hit > ev.type2) {
        ev.type2 = hit;
        ev.worst_pair = {i, j};
        ev.pair_defined = true;
      }
    }
  }
  if (!ev.pair_defined) ev.type2 = 0.0;
  return ev;
}

/// True iff every encoder is an M-type (entries within 1e-12 of integer
/// multiples of 1/m).
inline bool is_m_canonical(const IDCode& code, std::int64_t m) {
  detail::check(m >= 1, "is_m_canonical: M must be >= 1");
  for (const auto& e : code.encoders) {
    for (std::size_t x = 0; x < e.size(); ++x) {
      double scaled = e[x] * static_cast<double>(m);
      if (std::fabs(scaled - std::round(scaled)) > 1e-12 * static_cast<double>(m)) return false;
    }
  }
  return true;
}

/// Pairs of messages with (numerically) identical encoders.  A canonical
/// code containing such a pair cannot have eps + delta < 1.
inline std::vector<std::pair<std::size_t, std::size_t>> duplicate_encoder_pairs(
    const IDCode& code, double tol = 1e-12) {
  std::vector<std::pair<std::size_t, std::size_t>> dup;
  for (std::size_t i = 0; i < code.size(); ++i) {
    for (std::size_t j = i + 1; j < code.size(); ++j) {
      bool same = code.encoders[i].size() == code.encoders[j].size();
      for (std::size_t x = 0; same && x < code.encoders[i].size(); ++x)
        same = std::fabs(code.encoders[i][x] - code.encoders[j][x]) <= tol;
      if (same) dup.emplace_back(i, j);
    }
  }
  return dup;
}

struct SearchBudget {
  std::uint64_t max_candidates = 20000;  // candidate (encoder, acceptor) evaluations
  std::size_t max_messages = 0;          // 0 = unbounded
};

struct SearchResult {
  IDCode code;
  IDCodeEvaluation evaluation;
  std::uint64_t candidates_examined = 0;
};

namespace detail {

inline std::vector<Distribution> mtype_encoder_pool(std::size_t nx) {
  std::vector<Distribution> pool;
  auto push_unique = [&pool](const Distribution& d) {
    for (const auto& e : pool) {
      bool same = true;
      for (std::size_t x = 0; same && x < d.size(); ++x)
        same = std::fabs(d[x] - e[x]) <= 1e-12;
      if (same) return;
    }
    pool.push_back(d);
  };
  if (nx <= 3) {
    for (std::int64_t m : {1, 2, 4, 8}) {
      // enumerate all count vectors summing to m
      std::vector<std::int64_t> counts(nx, 0);
      std::vector<std::int64_t> stack;
      std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t x,
                                                               std::int64_t left) {
        if (x + 1 == nx) {
          counts[x] = left;
          push_unique(MType(counts, m).distribution());
          return;
        }
        for (std::int64_t c = 0; c <= left; ++c) {
          counts[x] = c;
          rec(x + 1, left - c);
        }
      };
      rec(0, m);
    }
  } else {
    for (std::size_t x = 0; x < nx; ++x) push_unique(Distribution::point_mass(nx, x));
    push_unique(Distribution::uniform(nx));
  }
  return pool;
}

inline std::vector<std::vector<std::size_t>> acceptor_pool(const Channel& w,
                                                           const std::vector<Distribution>& encoders) {
  std::vector<std::vector<std::size_t>> pool;
  std::size_t ny = w.output_size();
  if (ny <= 12) {
    for (std::size_t bits = 0; bits < (1ull << ny); ++bits) {
      std::vector<std::size_t> region;
      for (std::size_t y = 0; y < ny; ++y)
        if (bits & (1ull << y)) region.push_back(y);
      pool.push_back(std::move(region));
    }
  } else {
    // likelihood-level sets of each candidate output distribution
    auto push_unique = [&pool](std::vector<std::size_t> region) {
      std::sort(region.begin(), region.end());
      for (const auto& r : pool)
        if (r == region) return;
      pool.push_back(std::move(region));
    };
    push_unique({});
    for (const auto& e : encoders) {
      Distribution out = output_distribution(e, w);
      std::vector<std::size_t> order(ny);
      for (std::size_t y = 0; y < ny; ++y) order[y] = y;
      std::sort(order.begin(), order.end(),
                [&out](std::size_t a, std::size_t b) { return out[a] > out[b]; });
      std::vector<std::size_t> region;
      for (std::size_t y : order) {
        region.push_back(y);
        push_unique(region);
      }
    }
  }
  return pool;
}

}  // namespace detail

/// Greedy lower-bound witness search: walk a seeded permutation of the
/// (encoder, acceptor) candidate pool, adding a pair whenever the enlarged
/// code still meets the (eps, delta) targets exactly.  Never claims
/// optimality.
inline SearchResult search_codes(const Channel& w, double eps, double delta,
                                 const SearchBudget& budget, std::uint64_t seed) {
  detail::check(eps >= 0.0 && delta >= 0.0 && eps + delta < 1.0,
                "search_codes: requires eps + delta < 1 (identification capacity is "
                "infinite otherwise)");
  const double tol = 1e-12;
  std::vector<Distribution> encoders = detail::mtype_encoder_pool(w.input_size());
  std::vector<std::vector<std::size_t>> acceptors = detail::acceptor_pool(w, encoders);

  struct Candidate {
    std::size_t enc;
    std::size_t acc;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(encoders.size() * acceptors.size());
  for (std::size_t e = 0; e < encoders.size(); ++e)
    for (std::size_t a = 0; a < acceptors.size(); ++a) candidates.push_back({e, a});

  // Deterministic order: small acceptance regions first (they obstruct the
  // fewest later candidates), seeded hash within a size class, candidate
  // index as the final tiebreak.
  CounterRng rng{seed};
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    std::size_t sa = acceptors[candidates[a].acc].size();
    std::size_t sb = acceptors[candidates[b].acc].size();
    if (sa != sb) return sa < sb;
    std::uint64_t ha = rng.word(a), hb = rng.word(b);
    if (ha != hb) return ha < hb;
    return a < b;
  });

  IDCode code;
  std::vector<Distribution> outputs;
  SearchResult result;
  for (std::size_t idx : order) {
    if (result.candidates_examined >= budget.max_candidates) break;
    if (budget.max_messages && code.size() >= budget.max_messages) break;
    ++result.candidates_examined;
    const Distribution& enc = encoders[candidates[idx].enc];
    const std::vector<std::size_t>& acc = acceptors[candidates[idx].acc];
    Distribution out = output_distribution(enc, w);
    if (1.0 - detail::region_mass(out, acc) > eps + tol) continue;
    bool ok = true;
    for (std::size_t j = 0; ok && j < code.size(); ++j) {
      ok = detail::region_mass(out, code.acceptors[j]) <= delta + tol &&
           detail::region_mass(outputs[j], acc) <= delta + tol;
    }
    if (!ok) continue;
    code.encoders.push_back(enc);
    code.acceptors.push_back(acc);
    outputs.push_back(std::move(out));
  }

  detail::check(code.size() >= 1,
                "search_codes: empty result; the candidate pool must contain a full-output "
                "acceptor");
  result.code = std::move(code);
  result.evaluation = evaluate(result.code, w);
  return result;
}

}  // namespace idbounds

#endif  // IDBOUNDS_IDCODE_HPP
