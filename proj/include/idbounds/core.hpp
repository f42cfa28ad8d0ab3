// Core types for finite-alphabet channel computations: probability
// distributions, sub-distributions, channels, joint distributions and
// M-types, plus the elementary exact operations shared by every other
// header in this library.
//
// Conventions used throughout:
//   * all logarithms are natural; every quantity is in nats,
//   * 0 * log(0/q) = 0 and p * log(p/0) = +inf, applied before any
//     subtraction so that NaNs never propagate,
//   * alphabets are index ranges 0..k-1; display labels live in the
//     I/O layer only,
//   * all types are immutable after construction and all operations are
//     pure, so everything is safe to share across threads.

#ifndef IDBOUNDS_CORE_HPP
#define IDBOUNDS_CORE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace idbounds {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Input vectors may be off by this much before normalization (text-file
// round-off); anything worse fails construction.
inline constexpr double kInputSlack = 1e-9;

// Post-normalization identities are expected to hold this tightly.
inline constexpr double kProbTol = 1e-12;

/// Violated precondition or malformed input.  The CLI maps this to exit 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An explicit size/work cap was exceeded; the message names the
/// alternative interface to use.
class CapExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver failed to reach its tolerance within the iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void check(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

// Validates a nonnegative vector that should sum to `target` up to
// kInputSlack, clamps float dust, and rescales to an exact sum.
inline std::vector<double> normalized_vector(std::vector<double> v, double target,
                                             const std::string& what) {
  check(!v.empty(), what + ": empty vector");
  double sum = 0.0;
  for (double& e : v) {
    check(std::isfinite(e), what + ": non-finite entry");
    check(e >= -1e-12, what + ": negative entry");
    if (e < 0.0) e = 0.0;
    sum += e;
  }
  check(std::fabs(sum - target) <= kInputSlack,
        what + ": entries sum to " + std::to_string(sum) + ", expected " +
            std::to_string(target));
  for (double& e : v) e /= (sum / target);
  return v;
}

}  // namespace detail

/// Log-likelihood ratio log(p/q) with the extended-real conventions.
/// Both arguments zero is the caller's case to drop; returns NaN there.
inline double log_ratio(double p, double q) {
  if (p <= 0.0 && q <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (p <= 0.0) return -kInf;
  if (q <= 0.0) return kInf;
  return std::log(p / q);
}

/// A probability vector over a finite alphabet.  Normalized on
/// construction; inputs more than 1e-9 away from total mass 1 are rejected.
class Distribution {
 public:
  explicit Distribution(std::vector<double> probs)
      : probs_(detail::normalized_vector(std::move(probs), 1.0, "Distribution")) {}

  static Distribution uniform(std::size_t k) {
    detail::check(k >= 1, "uniform: alphabet must be nonempty");
    return Distribution(std::vector<double>(k, 1.0 / static_cast<double>(k)));
  }

  static Distribution point_mass(std::size_t k, std::size_t i) {
    detail::check(i < k, "point_mass: index out of range");
    std::vector<double> v(k, 0.0);
    v[i] = 1.0;
    return Distribution(std::move(v));
  }

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probs() const { return probs_; }

 private:
  std::vector<double> probs_;
};

/// A nonnegative vector with total mass at most 1, e.g. a truncated
/// channel response.
class SubDistribution {
 public:
  explicit SubDistribution(std::vector<double> mass) : mass_(std::move(mass)) {
    detail::check(!mass_.empty(), "SubDistribution: empty vector");
    total_ = 0.0;
    for (double& e : mass_) {
      detail::check(std::isfinite(e), "SubDistribution: non-finite entry");
      detail::check(e >= -1e-12, "SubDistribution: negative entry");
      if (e < 0.0) e = 0.0;
      total_ += e;
    }
    detail::check(total_ <= 1.0 + kProbTol, "SubDistribution: total mass exceeds 1");
  }

  SubDistribution(const Distribution& d) : mass_(d.probs()), total_(1.0) {}  // NOLINT

  std::size_t size() const { return mass_.size(); }
  double operator[](std::size_t i) const { return mass_[i]; }
  const std::vector<double>& mass() const { return mass_; }
  double total() const { return total_; }

 private:
  std::vector<double> mass_;
  double total_ = 0.0;
};

/// A discrete memoryless channel: a row-stochastic |X| x |Y| matrix of
/// conditional probabilities W(y|x).
class Channel {
 public:
  Channel(std::vector<double> flat, std::size_t input_size, std::size_t output_size)
      : flat_(std::move(flat)), nx_(input_size), ny_(output_size) {
    detail::check(nx_ >= 1 && ny_ >= 1, "Channel: empty alphabet");
    detail::check(flat_.size() == nx_ * ny_, "Channel: matrix shape mismatch");
    for (std::size_t x = 0; x < nx_; ++x) {
      std::vector<double> row(flat_.begin() + static_cast<std::ptrdiff_t>(x * ny_),
                              flat_.begin() + static_cast<std::ptrdiff_t>((x + 1) * ny_));
      try {
        row = detail::normalized_vector(std::move(row), 1.0, "Channel row");
      } catch (const ValidationError&) {
        throw ValidationError("row " + std::to_string(x) + " not stochastic");
      }
      std::copy(row.begin(), row.end(), flat_.begin() + static_cast<std::ptrdiff_t>(x * ny_));
    }
  }

  explicit Channel(const std::vector<std::vector<double>>& rows)
      : Channel(flatten(rows), rows.size(), rows.empty() ? 0 : rows.front().size()) {}

  /// Binary symmetric channel with crossover probability p.
  static Channel bsc(double p) {
    detail::check(p >= 0.0 && p <= 1.0, "bsc: crossover probability outside [0,1]");
    return Channel({1.0 - p, p, p, 1.0 - p}, 2, 2);
  }

  /// Binary erasure channel with erasure probability p; outputs {0, e, 1}.
  static Channel bec(double p) {
    detail::check(p >= 0.0 && p <= 1.0, "bec: erasure probability outside [0,1]");
    return Channel({1.0 - p, p, 0.0, 0.0, p, 1.0 - p}, 2, 3);
  }

  /// Noiseless k-ary channel.
  static Channel identity(std::size_t k) {
    detail::check(k >= 1, "identity: empty alphabet");
    std::vector<double> flat(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) flat[i * k + i] = 1.0;
    return Channel(std::move(flat), k, k);
  }

  /// Channel whose rows are all equal (zero capacity).
  static Channel useless(std::size_t inputs, std::size_t outputs) {
    detail::check(inputs >= 1 && outputs >= 1, "useless: empty alphabet");
    std::vector<double> flat(inputs * outputs, 1.0 / static_cast<double>(outputs));
    return Channel(std::move(flat), inputs, outputs);
  }

  std::size_t input_size() const { return nx_; }
  std::size_t output_size() const { return ny_; }
  double operator()(std::size_t x, std::size_t y) const { return flat_[x * ny_ + y]; }
  const std::vector<double>& flat() const { return flat_; }

  Distribution row(std::size_t x) const {
    detail::check(x < nx_, "Channel::row: input index out of range");
    return Distribution(std::vector<double>(
        flat_.begin() + static_cast<std::ptrdiff_t>(x * ny_),
        flat_.begin() + static_cast<std::ptrdiff_t>((x + 1) * ny_)));
  }

 private:
  static std::vector<double> flatten(const std::vector<std::vector<double>>& rows) {
    std::vector<double> flat;
    for (const auto& r : rows) {
      detail::check(r.size() == rows.front().size(), "Channel: ragged rows");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return flat;
  }

  std::vector<double> flat_;
  std::size_t nx_;
  std::size_t ny_;
};

/// A joint distribution on X x Y, used for P x W and P x Q pairings.
class JointDistribution {
 public:
  JointDistribution(const Distribution& p, const Channel& w) {
    detail::check(p.size() == w.input_size(),
                  "joint: input distribution size does not match channel input size");
    nx_ = w.input_size();
    ny_ = w.output_size();
    mass_.resize(nx_ * ny_);
    for (std::size_t x = 0; x < nx_; ++x)
      for (std::size_t y = 0; y < ny_; ++y) mass_[x * ny_ + y] = p[x] * w(x, y);
  }

  JointDistribution(const Distribution& p, const Distribution& q) {
    nx_ = p.size();
    ny_ = q.size();
    mass_.resize(nx_ * ny_);
    for (std::size_t x = 0; x < nx_; ++x)
      for (std::size_t y = 0; y < ny_; ++y) mass_[x * ny_ + y] = p[x] * q[y];
  }

  std::size_t input_size() const { return nx_; }
  std::size_t output_size() const { return ny_; }
  double operator()(std::size_t x, std::size_t y) const { return mass_[x * ny_ + y]; }
  const std::vector<double>& flat() const { return mass_; }

  Distribution marginal_x() const {
    std::vector<double> m(nx_, 0.0);
    for (std::size_t x = 0; x < nx_; ++x)
      for (std::size_t y = 0; y < ny_; ++y) m[x] += mass_[x * ny_ + y];
    return Distribution(std::move(m));
  }

  Distribution marginal_y() const {
    std::vector<double> m(ny_, 0.0);
    for (std::size_t x = 0; x < nx_; ++x)
      for (std::size_t y = 0; y < ny_; ++y) m[y] += mass_[x * ny_ + y];
    return Distribution(std::move(m));
  }

 private:
  std::vector<double> mass_;
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
};

/// A distribution whose entries are integer multiples of 1/M, stored as
/// exact counts.
class MType {
 public:
  MType(std::vector<std::int64_t> counts, std::int64_t m)
      : counts_(std::move(counts)), m_(m) {
    detail::check(m_ >= 1, "MType: denominator must be >= 1");
    detail::check(!counts_.empty(), "MType: empty alphabet");
    std::int64_t sum = 0;
    for (std::int64_t c : counts_) {
      detail::check(c >= 0, "MType: negative count");
      sum += c;
    }
    detail::check(sum == m_, "MType: counts must sum exactly to M");
  }

  std::int64_t denominator() const { return m_; }
  const std::vector<std::int64_t>& counts() const { return counts_; }
  std::size_t size() const { return counts_.size(); }

  Distribution distribution() const {
    std::vector<double> p(counts_.size());
    for (std::size_t i = 0; i < counts_.size(); ++i)
      p[i] = static_cast<double>(counts_[i]) / static_cast<double>(m_);
    return Distribution(std::move(p));
  }

 private:
  std::vector<std::int64_t> counts_;
  std::int64_t m_;
};

/// Output distribution PW(y) = sum_x P(x) W(y|x).
inline Distribution output_distribution(const Distribution& p, const Channel& w) {
  detail::check(p.size() == w.input_size(),
                "output_distribution: dimension mismatch between P and W");
  std::vector<double> out(w.output_size(), 0.0);
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] == 0.0) continue;
    for (std::size_t y = 0; y < w.output_size(); ++y) out[y] += p[x] * w(x, y);
  }
  return Distribution(std::move(out));
}

inline JointDistribution joint(const Distribution& p, const Channel& w) {
  return JointDistribution(p, w);
}

inline JointDistribution joint(const Distribution& p, const Distribution& q) {
  return JointDistribution(p, q);
}

/// Variational distance d(a, b) = (1/2) sum_x |a(x) - b(x)|.
inline double variational_distance(const SubDistribution& a, const SubDistribution& b) {
  detail::check(a.size() == b.size(), "variational_distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return 0.5 * s;
}

/// Memoryless n-fold extension W^n.  Tuples are indexed lexicographically
/// with the first letter most significant: (x_1..x_n) -> sum_i x_i *
/// |X|^(n-i).  Materialization is capped; larger blocklengths are served
/// implicitly by the spectrum samplers.
inline Channel product_channel(const Channel& w, int n,
                               std::size_t max_entries = 10'000'000) {
  detail::check(n >= 1, "product_channel: n must be >= 1");
  double log_entries =
      n * (std::log(static_cast<double>(w.input_size())) +
           std::log(static_cast<double>(w.output_size())));
  if (log_entries > std::log(static_cast<double>(max_entries))) {
    throw CapExceededError(
        "product_channel: |X|^n * |Y|^n exceeds the materialization cap; use the "
        "per-letter spectrum interface instead");
  }
  std::size_t nxn = 1, nyn = 1;
  for (int i = 0; i < n; ++i) {
    nxn *= w.input_size();
    nyn *= w.output_size();
  }
  std::vector<double> flat(nxn * nyn);
  std::vector<std::size_t> xs(static_cast<std::size_t>(n)), ys(static_cast<std::size_t>(n));
  for (std::size_t xi = 0; xi < nxn; ++xi) {
    std::size_t r = xi;
    for (int i = n - 1; i >= 0; --i) {
      xs[static_cast<std::size_t>(i)] = r % w.input_size();
      r /= w.input_size();
    }
    for (std::size_t yi = 0; yi < nyn; ++yi) {
      std::size_t s = yi;
      for (int i = n - 1; i >= 0; --i) {
        ys[static_cast<std::size_t>(i)] = s % w.output_size();
        s /= w.output_size();
      }
      double prod = 1.0;
      for (int i = 0; i < n; ++i)
        prod *= w(xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(i)]);
      flat[xi * nyn + yi] = prod;
    }
  }
  return Channel(std::move(flat), nxn, nyn);
}

/// KL divergence D(a || b) in nats with the 0 log 0 conventions.
inline double kl_divergence(const Distribution& a, const Distribution& b) {
  detail::check(a.size() == b.size(), "kl_divergence: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    if (b[i] == 0.0) return kInf;
    s += a[i] * std::log(a[i] / b[i]);
  }
  return s;
}

}  // namespace idbounds

#endif  // IDBOUNDS_CORE_HPP
