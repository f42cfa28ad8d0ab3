// Channel capacity, the convex-concave saddle point of beta_eps over
// (input, output) distribution pairs, the symbol-wise relaxation of the
// information-spectrum divergence, and the single-shot identification
// converses built from them.

#ifndef IDBOUNDS_MINIMAX_HPP
#define IDBOUNDS_MINIMAX_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "idbounds/core.hpp"
#include "idbounds/optim.hpp"
#include "idbounds/testing.hpp"

namespace idbounds {

struct CapacityResult {
  double capacity = 0.0;  // nats; certified within `gap` of the true value
  Distribution input_dist{std::vector<double>{1.0}};
  Distribution output_dist{std::vector<double>{1.0}};
  int iterations = 0;
  double gap = 0.0;  // upper bound minus lower bound at the final iterate
};

/// Non-convergence carrying the best certified iterate.
class CapacityConvergenceError : public ConvergenceError {
 public:
  CapacityConvergenceError(const std::string& msg, CapacityResult best)
      : ConvergenceError(msg), best_iterate(std::move(best)) {}
  CapacityResult best_iterate;
};

/// Alternating-maximization capacity solver with the standard duality
/// certificate: at every iterate,
///   sum_x r(x) D(W_x || rW)  <=  C(W)  <=  max_x D(W_x || rW).
inline CapacityResult blahut_arimoto(const Channel& w, double tol, int max_iterations = 200000) {
  detail::check(tol > 0.0, "blahut_arimoto: tolerance must be positive");
  std::size_t nx = w.input_size(), ny = w.output_size();
  std::vector<double> r(nx, 1.0 / static_cast<double>(nx));
  std::vector<double> d(nx, 0.0);

  CapacityResult best;
  best.gap = kInf;
  for (int it = 1; it <= max_iterations; ++it) {
    std::vector<double> q(ny, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) q[y] += r[x] * w(x, y);

    double lower = 0.0, upper = -kInf;
    for (std::size_t x = 0; x < nx; ++x) {
      double dx = 0.0;
      for (std::size_t y = 0; y < ny; ++y) {
        if (w(x, y) == 0.0) continue;
        dx += (q[y] == 0.0) ? kInf : w(x, y) * std::log(w(x, y) / q[y]);
      }
      d[x] = dx;
      if (r[x] > 0.0) lower += r[x] * dx;
      upper = std::max(upper, dx);
    }
    double gap = upper - lower;
    if (gap < best.gap) {
      best.capacity = lower;
      best.input_dist = Distribution(r);
      best.output_dist = Distribution(q);
      best.iterations = it;
      best.gap = gap;
    }
    if (gap <= tol) return best;

    double norm = 0.0;
    for (std::size_t x = 0; x < nx; ++x) {
      r[x] *= std::exp(d[x] - lower);
      norm += r[x];
    }
    for (std::size_t x = 0; x < nx; ++x) r[x] /= norm;
  }
  throw CapacityConvergenceError("blahut_arimoto: iteration cap reached with gap " +
                                     std::to_string(best.gap) + " > tol; best iterate capacity " +
                                     std::to_string(best.capacity),
                                 best);
}

/// beta_eps(P x W, P x Q): the hypothesis-testing quantity the converse
/// bounds optimize over.
inline BetaResult beta_joint(const Distribution& p, const Channel& w, const Distribution& q,
                             double eps) {
  detail::check(p.size() == w.input_size(), "beta_joint: P/W dimension mismatch");
  detail::check(q.size() == w.output_size(), "beta_joint: Q/W dimension mismatch");
  return beta_epsilon(joint(p, w), joint(p, q), eps);
}

namespace detail {

// Scalar dual of beta_eps(P x W, P x Q), exploiting the product form: for
// fixed lambda the objective is linear in P with per-input coefficients
//   g_lambda(x) = sum_y (lambda W(y|x) - Q(y))^+,
// so the dual value is max over lambda of lambda(1-eps) - sum_x P(x)
// g_lambda(x), attained at a breakpoint lambda = Q(y)/W(y|x).  The
// coefficient vector at the maximizer is a subgradient of beta in P.
struct JointBetaDual {
  double value = 0.0;
  double lambda = 0.0;
  std::vector<double> per_input_cost;  // g_lambda*(x)
};

inline JointBetaDual beta_joint_dual(const Distribution& p, const Channel& w,
                                     const Distribution& q, double eps) {
  std::size_t nx = w.input_size(), ny = w.output_size();
  std::vector<double> candidates{0.0};
  double max_bp = 0.0;
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      if (w(x, y) > 0.0) {
        double bp = q[y] / w(x, y);
        candidates.push_back(bp);
        max_bp = std::max(max_bp, bp);
      }
    }
  }
  candidates.push_back(max_bp + 1.0);

  JointBetaDual best;
  best.value = -kInf;
  std::vector<double> g(nx, 0.0);
  for (double lam : candidates) {
    double val = lam * (1.0 - eps);
    for (std::size_t x = 0; x < nx; ++x) {
      double gx = 0.0;
      for (std::size_t y = 0; y < ny; ++y) gx += std::max(0.0, lam * w(x, y) - q[y]);
      g[x] = gx;
      val -= p[x] * gx;
    }
    if (val > best.value) {
      best.value = val;
      best.lambda = lam;
      best.per_input_cost = g;
    }
  }
  best.value = std::max(best.value, 0.0);
  return best;
}

}  // namespace detail

struct SaddleOptions {
  double tol = 1e-4;
  // Inner/outer budgets; generous defaults sized for |X|, |Y| <= 4.
  optim::SearchOptions inner;
  optim::SearchOptions outer;
  double warm_step = 0.03125;  // initial pattern scale when warm-started
  SaddleOptions() {
    inner.initial_step = 0.25;
    inner.min_step = 1e-10;
    inner.gradient_rounds = 60;
    inner.gradient_scale_limit = 5;
    outer.initial_step = 0.25;
    outer.min_step = 1e-9;
    outer.gradient_rounds = 100;
  }
};

struct SaddleResult {
  Distribution p_star{std::vector<double>{1.0}};
  Distribution q_star{std::vector<double>{1.0}};
  double minmax_value = 0.0;  // min_P max_Q beta
  double maxmin_value = 0.0;  // max_Q min_P beta
  double gap = 0.0;
  long evaluations = 0;
};

/// Non-convergence carrying the best one-sided certificates found.
class SaddleConvergenceError : public ConvergenceError {
 public:
  SaddleConvergenceError(const std::string& msg, SaddleResult best)
      : ConvergenceError(msg), best_certificates(std::move(best)) {}
  SaddleResult best_certificates;
};

namespace detail {

struct InnerSolution {
  std::vector<double> argopt;
  double value = 0.0;
};

// max over Q of beta(P x W, P x Q); supergradient in Q from the optimal
// test's acceptance marginals.
inline InnerSolution saddle_inner_max_q(const Distribution& p, const Channel& w, double eps,
                                        const SaddleOptions& opt,
                                        const std::vector<double>& warm, long& evals) {
  std::size_t nx = w.input_size(), ny = w.output_size();
  optim::Objective f = [&](const std::vector<double>& qv) {
    return beta_joint(p, w, Distribution(qv), eps).beta;
  };
  optim::Gradient grad = [&](const std::vector<double>& qv) {
    BetaResult b = beta_joint(p, w, Distribution(qv), eps);
    std::vector<double> g(ny, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) g[y] += p[x] * b.accept[x * ny + y];
    return g;
  };
  optim::SearchOptions o = opt.inner;
  o.starts.clear();
  if (!warm.empty()) {
    // warm-started calls resume near the previous optimum
    o.starts.push_back(warm);
    o.initial_step = opt.warm_step;
  } else {
    o.starts.push_back(std::vector<double>(ny, 1.0 / static_cast<double>(ny)));
    o.starts.push_back(output_distribution(p, w).probs());
  }
  optim::SearchResult res = optim::optimize_over_simplex(f, ny, /*maximize=*/true, o, grad);
  evals += res.evaluations;
  return {res.x, res.value};
}

// min over P of beta(P x W, P x Q); subgradient in P from the scalar dual.
// For binary inputs a convex ternary search nails the segment directly.
inline InnerSolution saddle_inner_min_p(const Channel& w, const Distribution& q, double eps,
                                        const SaddleOptions& opt,
                                        const std::vector<double>& warm, long& evals) {
  std::size_t nx = w.input_size();
  if (nx == 2) {
    auto f = [&](double t) {
      return beta_joint(Distribution(std::vector<double>{1.0 - t, t}), w, q, eps).beta;
    };
    auto [t, v] = optim::ternary_min_unit(f, 60);
    evals += 128;
    return {{1.0 - t, t}, v};
  }
  optim::Objective f = [&](const std::vector<double>& pv) {
    return beta_joint(Distribution(pv), w, q, eps).beta;
  };
  optim::Gradient grad = [&](const std::vector<double>& pv) {
    JointBetaDual d = beta_joint_dual(Distribution(pv), w, q, eps);
    std::vector<double> g(nx);
    for (std::size_t x = 0; x < nx; ++x) g[x] = -d.per_input_cost[x];
    return g;
  };
  optim::SearchOptions o = opt.inner;
  o.starts.clear();
  if (!warm.empty()) {
    o.starts.push_back(warm);
    o.initial_step = opt.warm_step;
  } else {
    o.starts.push_back(std::vector<double>(nx, 1.0 / static_cast<double>(nx)));
  }
  optim::SearchResult res = optim::optimize_over_simplex(f, nx, /*maximize=*/false, o, grad);
  evals += res.evaluations;
  return {res.x, res.value};
}

}  // namespace detail

/// Solves both orderings of the beta saddle,
///   min_P max_Q beta_eps(P x W, P x Q)  and  max_Q min_P beta_eps(...),
/// to within `tol` of each other.  The two optima agree (minimax equality
/// on compact simplices); the reported gap is the numerical certificate.
inline SaddleResult saddle_solve(const Channel& w, double eps, double tol,
                                 SaddleOptions opt = SaddleOptions()) {
  detail::check(eps >= 0.0 && eps < 1.0, "saddle_solve: eps must lie in [0,1)");
  detail::check(tol > 0.0, "saddle_solve: tolerance must be positive");
  opt.tol = tol;
  std::size_t nx = w.input_size(), ny = w.output_size();
  long evals = 0;

  // Outer minimization over P of phi(P) = max_Q beta; Danskin subgradient
  // at the inner maximizer.
  std::vector<double> warm_q;
  optim::Objective phi = [&](const std::vector<double>& pv) {
    detail::InnerSolution inner =
        detail::saddle_inner_max_q(Distribution(pv), w, eps, opt, warm_q, evals);
    warm_q = inner.argopt;
    return inner.value;
  };
  optim::Gradient phi_grad = [&](const std::vector<double>& pv) {
    Distribution p(pv);
    detail::InnerSolution inner = detail::saddle_inner_max_q(p, w, eps, opt, warm_q, evals);
    warm_q = inner.argopt;
    detail::JointBetaDual d =
        detail::beta_joint_dual(p, w, Distribution(inner.argopt), eps);
    std::vector<double> g(nx);
    for (std::size_t x = 0; x < nx; ++x) g[x] = -d.per_input_cost[x];
    return g;
  };

  optim::SearchOptions outer_p = opt.outer;
  outer_p.starts.clear();
  outer_p.starts.push_back(std::vector<double>(nx, 1.0 / static_cast<double>(nx)));
  optim::SearchResult min_side;
  if (nx == 2) {
    auto f1 = [&](double t) { return phi({1.0 - t, t}); };
    auto [t, v] = optim::ternary_min_unit(f1, 70);
    min_side.x = {1.0 - t, t};
    min_side.value = v;
  } else {
    min_side = optim::optimize_over_simplex(phi, nx, /*maximize=*/false, outer_p, phi_grad);
  }

  // Outer maximization over Q of h(Q) = min_P beta; supergradient from the
  // optimal test at the inner minimizer.
  std::vector<double> warm_p;
  optim::Objective h = [&](const std::vector<double>& qv) {
    detail::InnerSolution inner =
        detail::saddle_inner_min_p(w, Distribution(qv), eps, opt, warm_p, evals);
    warm_p = inner.argopt;
    return inner.value;
  };
  optim::Gradient h_grad = [&](const std::vector<double>& qv) {
    Distribution q(qv);
    detail::InnerSolution inner = detail::saddle_inner_min_p(w, q, eps, opt, warm_p, evals);
    warm_p = inner.argopt;
    BetaResult b = beta_joint(Distribution(inner.argopt), w, q, eps);
    std::vector<double> g(ny, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) g[y] += inner.argopt[x] * b.accept[x * ny + y];
    return g;
  };

  optim::SearchOptions outer_q = opt.outer;
  outer_q.starts.clear();
  outer_q.starts.push_back(std::vector<double>(ny, 1.0 / static_cast<double>(ny)));
  outer_q.starts.push_back(
      output_distribution(Distribution(std::vector<double>(nx, 1.0 / static_cast<double>(nx))), w)
          .probs());
  optim::SearchResult max_side =
      optim::optimize_over_simplex(h, ny, /*maximize=*/true, outer_q, h_grad);

  SaddleResult res;
  res.p_star = Distribution(min_side.x);
  res.q_star = Distribution(max_side.x);
  res.minmax_value = min_side.value;
  res.maxmin_value = max_side.value;
  res.gap = res.minmax_value - res.maxmin_value;
  res.evaluations = evals;
  if (!(res.gap <= tol && res.gap >= -tol)) {
    throw SaddleConvergenceError("saddle_solve: certificates did not meet tolerance; minmax " +
                                     std::to_string(res.minmax_value) + ", maxmin " +
                                     std::to_string(res.maxmin_value),
                                 res);
  }
  return res;
}

struct SupDsResult {
  double value = 0.0;
  std::size_t witness_x = 0;
};

/// Symbol-wise relaxation: sup_P D_s^eps(P x W || P x Q) equals the best
/// single-input value max_x D_s^eps(W(.|x) || Q) (point masses attain the
/// supremum and the relaxation bounds it from above).
inline SupDsResult sup_ds_over_inputs(const Channel& w, const Distribution& q, double eps) {
  detail::check(q.size() == w.output_size(), "sup_ds_over_inputs: Q/W dimension mismatch");
  SupDsResult res;
  res.value = -kInf;
  for (std::size_t x = 0; x < w.input_size(); ++x) {
    double v = ds_epsilon(w.row(x), q, eps).value;
    if (v > res.value) {
      res.value = v;
      res.witness_x = x;
    }
  }
  return res;
}

enum class ConverseVariant { ds_corollary1, beta_minmax, beta_maxmin, existing_bound };

inline const char* to_string(ConverseVariant v) {
  switch (v) {
    case ConverseVariant::ds_corollary1: return "ds_corollary1";
    case ConverseVariant::beta_minmax: return "beta_minmax";
    case ConverseVariant::beta_maxmin: return "beta_maxmin";
    case ConverseVariant::existing_bound: return "existing_bound";
  }
  return "unknown";
}

struct ConverseSlack {
  double loglog_alphabet = 0.0;
  double eta_term = 0.0;
  double constant = 2.0;
  double total() const { return loglog_alphabet + eta_term + constant; }
};

struct ConverseReport {
  double bound_on_loglogN = 0.0;  // nats
  double main_term = 0.0;
  ConverseSlack slack;
  double eta = 0.0;
  ConverseVariant variant = ConverseVariant::ds_corollary1;
  // Diagnostics for the ds variant: value of the smooth beta-based
  // surrogate at its minimizer and of a direct grid scan (NaN when the
  // grid is skipped).
  double surrogate_main = std::numeric_limits<double>::quiet_NaN();
  double direct_grid_main = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> q_witness;
};

namespace detail {

inline void check_converse_params(const Channel& w, double eps, double delta, double eta) {
  check(w.input_size() >= 2, "converse: |X| must be >= 2 (log log |X| degenerates)");
  check(eps >= 0.0 && delta >= 0.0 && eps + delta < 1.0,
        "converse: requires eps + delta < 1 (identification capacity is infinite "
        "otherwise)");
  check(eta > 0.0 && eta < 1.0 - eps - delta,
        "converse: eta must lie in (0, 1 - eps - delta)");
}

}  // namespace detail

/// Upper bound on log log N*(eps, delta | W):
///   min_Q max_x D_s^{eps+delta+eta}(W(.|x) || Q) + loglog|X| + 2 log(1/eta) + 2.
///
/// D_s is piecewise constant in Q, so the Q-minimization runs on the
/// continuous surrogate max_x -log beta (sandwich-tight up to log(1/zeta))
/// and the direct objective is then evaluated at every candidate; any
/// candidate Q yields a valid bound, and the best one is reported.
inline ConverseReport corollary1_bound(const Channel& w, double eps, double delta, double eta,
                                       int direct_grid_steps = 32) {
  detail::check_converse_params(w, eps, delta, eta);
  double eps_all = eps + delta + eta;
  std::size_t nx = w.input_size(), ny = w.output_size();

  optim::Objective surrogate = [&](const std::vector<double>& qv) {
    Distribution q(qv);
    double worst = -kInf;
    for (std::size_t x = 0; x < nx; ++x) {
      double beta = beta_epsilon(w.row(x), q, eps_all).beta;
      worst = std::max(worst, beta > 0.0 ? -std::log(beta) : kInf);
    }
    return worst;
  };
  optim::Gradient surrogate_grad = [&](const std::vector<double>& qv) {
    Distribution q(qv);
    double worst = -kInf;
    BetaResult worst_b;
    for (std::size_t x = 0; x < nx; ++x) {
      BetaResult b = beta_epsilon(w.row(x), q, eps_all);
      double v = b.beta > 0.0 ? -std::log(b.beta) : kInf;
      if (v > worst) {
        worst = v;
        worst_b = b;
      }
    }
    std::vector<double> g(ny, 0.0);
    if (worst_b.beta > 0.0)
      for (std::size_t y = 0; y < ny; ++y) g[y] = -worst_b.accept[y] / worst_b.beta;
    return g;
  };

  optim::SearchOptions o;
  o.gradient_rounds = 200;
  o.starts.push_back(std::vector<double>(ny, 1.0 / static_cast<double>(ny)));
  o.starts.push_back(blahut_arimoto(w, 1e-8).output_dist.probs());
  optim::SearchResult sres =
      optim::optimize_over_simplex(surrogate, ny, /*maximize=*/false, o, surrogate_grad);

  ConverseReport rep;
  rep.variant = ConverseVariant::ds_corollary1;
  rep.eta = eta;
  rep.surrogate_main = sres.value;

  // Evaluate the direct objective at every candidate Q; keep the best.
  double best_direct = kInf;
  std::vector<double> best_q;
  auto consider = [&](const std::vector<double>& qv) {
    double v = sup_ds_over_inputs(w, Distribution(qv), eps_all).value;
    if (v < best_direct) {
      best_direct = v;
      best_q = qv;
    }
  };
  consider(sres.x);
  for (const auto& s : o.starts) consider(s);
  if (direct_grid_steps > 0 && ny <= 4) {
    // boundary points included: a deficient-support Q can minimize the
    // D_s objective (the +inf levels may carry too little mass to matter)
    optim::for_each_grid_point(ny, direct_grid_steps,
                               [&](const std::vector<double>& qv) { consider(qv); });
    rep.direct_grid_main = best_direct;
  }

  rep.main_term = best_direct;
  rep.q_witness = best_q;
  rep.slack.loglog_alphabet = std::log(std::log(static_cast<double>(nx)));
  rep.slack.eta_term = 2.0 * std::log(1.0 / eta);
  rep.slack.constant = 2.0;
  rep.bound_on_loglogN = rep.main_term + rep.slack.total();
  return rep;
}

struct Corollary2Result {
  ConverseReport minmax;
  ConverseReport maxmin;
  SaddleResult saddle;
};

/// Both beta-form converses, evaluated at the saddle of
/// beta_{eps+delta+eta}; the two main terms agree up to the solver gap.
inline Corollary2Result corollary2_bound(const Channel& w, double eps, double delta, double eta,
                                         double saddle_tol = 1e-4) {
  detail::check_converse_params(w, eps, delta, eta);
  double eps_all = eps + delta + eta;
  Corollary2Result out;
  out.saddle = saddle_solve(w, eps_all, saddle_tol);

  ConverseSlack slack;
  slack.loglog_alphabet = std::log(std::log(static_cast<double>(w.input_size())));
  slack.eta_term = 2.0 * std::log(1.0 / eta);
  slack.constant = 2.0;

  auto fill = [&](ConverseReport& rep, double beta, ConverseVariant variant) {
    rep.variant = variant;
    rep.eta = eta;
    rep.main_term = beta > 0.0 ? -std::log(beta) : kInf;
    rep.slack = slack;
    rep.bound_on_loglogN = rep.main_term + slack.total();
    rep.q_witness = out.saddle.q_star.probs();
  };
  fill(out.minmax, out.saddle.minmax_value, ConverseVariant::beta_minmax);
  fill(out.maxmin, out.saddle.maxmin_value, ConverseVariant::beta_maxmin);
  return out;
}

struct ExistingBoundReport {
  double value = 0.0;  // lower bound on eps + delta
  double inf_term = 0.0;
  double penalty = 0.0;
  std::vector<double> witness_p;
  double gamma = 0.0;
  std::int64_t m = 1;
};

/// The older two-sided-tail bound
///   eps + delta >= inf_P [ 1 - 2 P x W(T_P^c) ] - sqrt(e^gamma / M),
/// where T_P keeps pairs with log(W(y|x)/PW(y)) <= gamma.  T_P moves with
/// P, so the inf is evaluated by a simplex grid plus local pattern descent
/// (|X| <= 4); kept for side-by-side comparison with theorem1-style bounds.
inline ExistingBoundReport existing_bound(const Channel& w, double gamma, std::int64_t m,
                                          int grid_steps = 32) {
  detail::check(m >= 1, "existing_bound: M must be >= 1");
  if (w.input_size() > 4)
    throw CapExceededError(
        "existing_bound: the P-grid evaluation is limited to |X| <= 4");
  std::size_t nx = w.input_size(), ny = w.output_size();

  auto objective = [&](const std::vector<double>& pv) {
    Distribution p(pv);
    Distribution pw = output_distribution(p, w);
    double outside = 0.0;
    for (std::size_t x = 0; x < nx; ++x) {
      if (p[x] == 0.0) continue;
      for (std::size_t y = 0; y < ny; ++y) {
        if (w(x, y) == 0.0) continue;
        double lr = log_ratio(w(x, y), pw[y]);
        if (lr > gamma) outside += p[x] * w(x, y);
      }
    }
    return 1.0 - 2.0 * outside;
  };

  double best = kInf;
  std::vector<double> best_p(nx, 1.0 / static_cast<double>(nx));
  optim::for_each_grid_point(nx, grid_steps, [&](const std::vector<double>& pv) {
    double v = objective(pv);
    if (v < best) {
      best = v;
      best_p = pv;
    }
  });
  optim::SearchOptions o;
  o.gradient_rounds = 0;  // indicator objective, pattern-only local descent
  o.initial_step = 1.0 / static_cast<double>(grid_steps);
  o.starts.push_back(best_p);
  optim::SearchResult res = optim::optimize_over_simplex(objective, nx, false, o);
  if (res.value < best) {
    best = res.value;
    best_p = res.x;
  }

  ExistingBoundReport rep;
  rep.inf_term = best;
  rep.penalty = std::sqrt(std::exp(gamma) / static_cast<double>(m));
  rep.value = rep.inf_term - rep.penalty;
  rep.witness_p = best_p;
  rep.gamma = gamma;
  rep.m = m;
  return rep;
}

}  // namespace idbounds

#endif  // IDBOUNDS_MINIMAX_HPP
