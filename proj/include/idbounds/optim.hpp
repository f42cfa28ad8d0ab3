// Small deterministic optimizers over the probability simplex, sized for
// the alphabet dimensions this library targets (|X|, |Y| <= 8 or so).
//
// The workhorse is a hybrid of projected (sub/super)gradient steps with
// diminishing c/sqrt(t) step sizes and a multiscale pattern search over
// the edge directions e_i - e_j.  Objectives here are convex or concave
// piecewise-linear (values of small testing LPs), for which the gradient
// phase escapes the flat kinks the pattern phase can stall on, and the
// pattern phase polishes the last digits the gradient phase cannot.

#ifndef IDBOUNDS_OPTIM_HPP
#define IDBOUNDS_OPTIM_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "idbounds/core.hpp"

namespace idbounds {
namespace optim {

/// Euclidean projection onto the probability simplex.
inline std::vector<double> project_to_simplex(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  std::size_t rho = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cum += u[i];
    double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) {
      rho = i + 1;
      tau = t;
    }
  }
  if (rho == 0) tau = (cum - 1.0) / static_cast<double>(u.size());
  for (double& x : v) x = std::max(0.0, x - tau);
  double s = 0.0;
  for (double x : v) s += x;
  if (s <= 0.0) return std::vector<double>(v.size(), 1.0 / static_cast<double>(v.size()));
  for (double& x : v) x /= s;
  return v;
}

using Objective = std::function<double(const std::vector<double>&)>;
// Returns a subgradient (minimization) or supergradient (maximization).
using Gradient = std::function<std::vector<double>(const std::vector<double>&)>;

struct SearchOptions {
  double initial_step = 0.25;
  double min_step = 1e-9;
  int gradient_rounds = 400;     // gradient steps per scale visit, 0 disables
  int gradient_scale_limit = 8;  // run the gradient phase only on the coarsest scales
  int max_pattern_sweeps = 200;  // per scale
  std::vector<std::vector<double>> starts;  // defaults to the barycenter
};

struct SearchResult {
  std::vector<double> x;
  double value = 0.0;
  long evaluations = 0;
};

namespace detail_opt {

inline double signed_value(double v, bool maximize) { return maximize ? -v : v; }

// One multiscale descent from a given start; `f` is wrapped so that lower
// is always better.
inline void descend(const Objective& f, const Gradient& grad, bool maximize,
                    const SearchOptions& opt, std::vector<double> x, SearchResult& best) {
  const std::size_t dim = x.size();
  x = project_to_simplex(std::move(x));
  double fx = signed_value(f(x), maximize);
  ++best.evaluations;
  if (fx < signed_value(best.value, maximize) || best.x.empty()) {
    best.x = x;
    best.value = maximize ? -fx : fx;
  }

  int scale = 0;
  for (double step = opt.initial_step; step >= opt.min_step; step *= 0.5, ++scale) {
    // Gradient phase: projected steps with diminishing sizes, keeping the
    // best iterate rather than the last one.
    if (grad && opt.gradient_rounds > 0 && scale < opt.gradient_scale_limit) {
      std::vector<double> y = x;
      for (int t = 1; t <= opt.gradient_rounds; ++t) {
        std::vector<double> g = grad(y);
        double norm = 0.0;
        for (double gi : g) norm += gi * gi;
        norm = std::sqrt(norm);
        if (norm < 1e-15) break;
        double eta = step / (norm * std::sqrt(static_cast<double>(t)));
        for (std::size_t i = 0; i < dim; ++i)
          y[i] += (maximize ? eta : -eta) * g[i];
        y = project_to_simplex(std::move(y));
        double fy = signed_value(f(y), maximize);
        ++best.evaluations;
        if (fy < fx) {
          fx = fy;
          x = y;
        }
      }
    }
    // Pattern phase over edge directions.
    for (int sweep = 0; sweep < opt.max_pattern_sweeps; ++sweep) {
      bool improved = false;
      for (std::size_t i = 0; i < dim && !improved; ++i) {
        for (std::size_t j = 0; j < dim && !improved; ++j) {
          if (i == j) continue;
          std::vector<double> y = x;
          y[i] += step;
          y[j] -= step;
          y = project_to_simplex(std::move(y));
          double fy = signed_value(f(y), maximize);
          ++best.evaluations;
          if (fy < fx - 1e-15) {
            fx = fy;
            x = std::move(y);
            improved = true;
          }
        }
      }
      if (!improved) break;
    }
    if (fx < signed_value(best.value, maximize)) {
      best.x = x;
      best.value = maximize ? -fx : fx;
    }
  }
}

}  // namespace detail_opt

/// Minimize (maximize = false) or maximize a convex (concave) objective
/// over the probability simplex of the given dimension.
inline SearchResult optimize_over_simplex(const Objective& f, std::size_t dim, bool maximize,
                                          const SearchOptions& opt = {},
                                          const Gradient& grad = nullptr) {
  SearchResult best;
  best.value = maximize ? -kInf : kInf;
  std::vector<std::vector<double>> starts = opt.starts;
  if (starts.empty())
    starts.push_back(std::vector<double>(dim, 1.0 / static_cast<double>(dim)));
  for (const auto& s : starts) detail_opt::descend(f, grad, maximize, opt, s, best);
  return best;
}

/// Ternary search for a convex function over the 1-simplex segment
/// parameterized as ((1-t), t).  Returns the minimizing t and value.
inline std::pair<double, double> ternary_min_unit(const std::function<double(double)>& f,
                                                  int iterations = 90) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < iterations && hi - lo > 1e-15; ++it) {
    double m1 = lo + (hi - lo) / 3.0;
    double m2 = hi - (hi - lo) / 3.0;
    if (f(m1) <= f(m2))
      hi = m2;
    else
      lo = m1;
  }
  double t = 0.5 * (lo + hi);
  double best_t = t, best_v = f(t);
  for (double cand : {lo, hi, 0.0, 1.0}) {
    double v = f(cand);
    if (v < best_v) {
      best_v = v;
      best_t = cand;
    }
  }
  return {best_t, best_v};
}

/// Enumerates the simplex grid { k/steps } and calls `fn` on every point.
inline void for_each_grid_point(std::size_t dim, int steps,
                                const std::function<void(const std::vector<double>&)>& fn) {
  std::vector<int> counts(dim, 0);
  std::vector<double> point(dim, 0.0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == dim) {
      counts[i] = left;
      for (std::size_t k = 0; k < dim; ++k)
        point[k] = static_cast<double>(counts[k]) / static_cast<double>(steps);
      fn(point);
      return;
    }
    for (int c = 0; c <= left; ++c) {
      counts[i] = c;
      rec(i + 1, left - c);
    }
  };
  rec(0, steps);
}

}  // namespace optim
}  // namespace idbounds

#endif  // IDBOUNDS_OPTIM_HPP
