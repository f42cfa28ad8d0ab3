// Seedable, splittable, counter-based pseudorandom generator.
//
// The generator is splitmix64 run in counter mode: the i-th output word is
// a fixed 64-bit hash of (seed, i).  Streams derived by split() use an
// independently mixed seed, so trials can run on any number of threads and
// still produce bit-identical results.  Reports record the generator name
// and seed so every Monte Carlo number is reproducible.

#ifndef IDBOUNDS_RNG_HPP
#define IDBOUNDS_RNG_HPP

#include <cstdint>

#include "idbounds/core.hpp"

namespace idbounds {

inline constexpr const char* kGeneratorName = "splitmix64-counter";

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

}  // namespace detail

struct CounterRng {
  std::uint64_t seed = 0;

  std::uint64_t word(std::uint64_t counter) const {
    return detail::mix64(seed + (counter + 1) * 0x9E3779B97F4A7C15ull);
  }

  /// Uniform double in [0, 1) from the given counter.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(word(counter) >> 11) * 0x1.0p-53;
  }

  /// Independent stream derived from this seed; stream indices need not be
  /// contiguous.
  CounterRng split(std::uint64_t stream) const {
    return CounterRng{detail::mix64(seed ^ (0xD1B54A32D192ED03ull * (stream + 1)))};
  }
};

/// Sequential view over a CounterRng stream.
class RngStream {
 public:
  explicit RngStream(CounterRng g) : g_(g) {}
  explicit RngStream(std::uint64_t seed) : g_{seed} {}

  double next_uniform() { return g_.uniform(counter_++); }
  std::uint64_t next_word() { return g_.word(counter_++); }
  std::uint64_t consumed() const { return counter_; }

 private:
  CounterRng g_;
  std::uint64_t counter_ = 0;
};

/// Inverse-CDF sample from a distribution over the fixed index order.
inline std::size_t sample_index(const Distribution& p, double u) {
  double cum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    cum += p[i];
    if (u < cum) return i;
  }
  // u landed in the float dust above the last cumulative step.
  std::size_t i = p.size();
  while (i-- > 0)
    if (p[i] > 0.0) return i;
  return 0;
}

}  // namespace idbounds

#endif  // IDBOUNDS_RNG_HPP
