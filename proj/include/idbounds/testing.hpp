// Exact binary hypothesis testing on finite alphabets.
//
// Everything here works on the merged log-likelihood-ratio levels of a
// pair (P, Q): outcomes with equal ratio are interchangeable for any
// optimal test, so they are collapsed into a single level before
// thresholding.  Levels use explicit +-inf sentinels (P-only outcomes sit
// at +inf, Q-only outcomes at -inf; outcomes with P = Q = 0 are dropped).
//
// beta_epsilon computes the Neyman-Pearson optimum exactly by greedy
// rejection of the lowest-ratio mass with boundary randomization; the
// companion beta_epsilon_dual evaluates the max over the scalar dual
//   lambda (1 - eps) - sum_z (lambda P(z) - Q(z))^+
// at its breakpoints, which equals the primal optimum by LP duality and
// serves as an independent certificate.

#ifndef IDBOUNDS_TESTING_HPP
#define IDBOUNDS_TESTING_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "idbounds/core.hpp"

namespace idbounds {

/// One merged likelihood-ratio level: log(P/Q) value in nats with the
/// total P- and Q-mass sitting on it.
struct LogRatioLevel {
  double value = 0.0;
  double p_mass = 0.0;
  double q_mass = 0.0;
};

namespace detail {

// Merging tolerance for near-equal log-ratio values produced by float
// arithmetic on exactly tied ratios.
inline constexpr double kLevelMergeTol = 1e-12;

inline bool level_values_equal(double a, double b) {
  if (a == b) return true;  // covers equal infinities
  return std::fabs(a - b) <= kLevelMergeTol;
}

struct LevelDecomposition {
  std::vector<LogRatioLevel> levels;     // strictly increasing values
  std::vector<int> outcome_level;        // outcome index -> level index (-1 if dropped)
};

inline LevelDecomposition merged_levels(const std::vector<double>& p,
                                        const std::vector<double>& q) {
  check(p.size() == q.size(), "hypothesis test: P and Q must share an alphabet");
  struct Item {
    double value;
    std::size_t outcome;
  };
  std::vector<Item> items;
  items.reserve(p.size());
  for (std::size_t z = 0; z < p.size(); ++z) {
    if (p[z] <= 0.0 && q[z] <= 0.0) continue;
    items.push_back({log_ratio(p[z], q[z]), z});
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.outcome < b.outcome;
  });

  LevelDecomposition out;
  out.outcome_level.assign(p.size(), -1);
  for (const Item& it : items) {
    if (out.levels.empty() || !level_values_equal(out.levels.back().value, it.value)) {
      out.levels.push_back({it.value, 0.0, 0.0});
    }
    out.levels.back().p_mass += p[it.outcome];
    out.levels.back().q_mass += q[it.outcome];
    out.outcome_level[it.outcome] = static_cast<int>(out.levels.size() - 1);
  }
  return out;
}

}  // namespace detail

/// A randomized likelihood-ratio test: reject the null below `threshold`,
/// reject with probability `reject_prob_at_threshold` on it, accept above.
struct NPTest {
  std::vector<LogRatioLevel> levels;
  double threshold = -kInf;
  double reject_prob_at_threshold = 0.0;
  int threshold_level = -1;  // index into levels, -1 when nothing is rejected

  double type1() const {
    double t = 0.0;
    for (int i = 0; i < threshold_level; ++i) t += levels[static_cast<std::size_t>(i)].p_mass;
    if (threshold_level >= 0)
      t += reject_prob_at_threshold * levels[static_cast<std::size_t>(threshold_level)].p_mass;
    return t;
  }

  double type2() const {
    double t = 0.0;
    for (std::size_t i = static_cast<std::size_t>(threshold_level < 0 ? 0 : threshold_level);
         i < levels.size(); ++i) {
      if (static_cast<int>(i) == threshold_level)
        t += (1.0 - reject_prob_at_threshold) * levels[i].q_mass;
      else
        t += levels[i].q_mass;
    }
    return t;
  }
};

/// Exact Neyman-Pearson optimum beta_eps(P, Q) together with the achieving
/// test and the per-outcome acceptance probabilities (aligned with the
/// input index order; dropped outcomes accept with probability 1).
struct BetaResult {
  double beta = 1.0;
  double type1 = 0.0;
  double type2 = 1.0;
  NPTest test;
  std::vector<double> accept;
};

namespace detail {

inline BetaResult beta_on_masses(const std::vector<double>& p, const std::vector<double>& q,
                                 double eps) {
  check(eps >= 0.0 && eps < 1.0, "beta_epsilon: eps must lie in [0,1)");
  LevelDecomposition dec = merged_levels(p, q);
  auto& levels = dec.levels;

  // Walk levels in increasing ratio order, rejecting whole levels while the
  // type-I budget allows, then randomize on the boundary level.  Levels
  // with zero P-mass (Q-only outcomes at -inf) are free rejections.
  NPTest test;
  test.levels = levels;
  double spent = 0.0;
  int boundary = -1;
  double theta = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i].p_mass <= 0.0) continue;
    if (spent + levels[i].p_mass <= eps) {
      spent += levels[i].p_mass;
      continue;
    }
    boundary = static_cast<int>(i);
    theta = (eps - spent) / levels[i].p_mass;
    theta = std::min(1.0, std::max(0.0, theta));
    break;
  }
  if (boundary < 0) {
    // Only reachable when all P-mass fits under eps, which needs eps >= 1;
    // guarded above.  Treat defensively as "reject everything but the top".
    boundary = static_cast<int>(levels.size()) - 1;
    theta = 0.0;
  }
  test.threshold_level = boundary;
  test.threshold = levels[static_cast<std::size_t>(boundary)].value;
  test.reject_prob_at_threshold = theta;

  // The boundary index above skipped zero-P levels; every level strictly
  // below the boundary is rejected outright (they are all either spent
  // P-mass or free Q-only levels).
  double beta = 0.0;
  for (std::size_t i = static_cast<std::size_t>(boundary); i < levels.size(); ++i) {
    if (static_cast<int>(i) == boundary)
      beta += (1.0 - theta) * levels[i].q_mass;
    else
      beta += levels[i].q_mass;
  }

  BetaResult res;
  res.beta = beta;
  res.test = test;
  res.type1 = test.type1();
  res.type2 = beta;
  res.accept.assign(p.size(), 1.0);
  for (std::size_t z = 0; z < p.size(); ++z) {
    int li = dec.outcome_level[z];
    if (li < 0) continue;
    if (li < boundary)
      res.accept[z] = 0.0;
    else if (li == boundary)
      res.accept[z] = 1.0 - theta;
  }
  return res;
}

}  // namespace detail

inline BetaResult beta_epsilon(const Distribution& p, const Distribution& q, double eps) {
  detail::check(p.size() == q.size(), "beta_epsilon: P and Q must share an alphabet");
  return detail::beta_on_masses(p.probs(), q.probs(), eps);
}

inline BetaResult beta_epsilon(const JointDistribution& p, const JointDistribution& q,
                               double eps) {
  detail::check(p.input_size() == q.input_size() && p.output_size() == q.output_size(),
                "beta_epsilon: joint distributions must share an alphabet");
  return detail::beta_on_masses(p.flat(), q.flat(), eps);
}

/// Value of the scalar LP dual of beta_eps at its optimum, with the
/// maximizing lambda.  Agrees with the primal optimum by strong duality.
struct BetaDual {
  double value = 0.0;
  double lambda = 0.0;
};

inline BetaDual beta_epsilon_dual(const std::vector<double>& p, const std::vector<double>& q,
                                  double eps) {
  detail::check(p.size() == q.size(), "beta_epsilon_dual: dimension mismatch");
  detail::check(eps >= 0.0 && eps < 1.0, "beta_epsilon_dual: eps must lie in [0,1)");
  std::vector<double> candidates{0.0};
  double max_bp = 0.0;
  for (std::size_t z = 0; z < p.size(); ++z) {
    if (p[z] > 0.0) {
      double bp = q[z] / p[z];
      candidates.push_back(bp);
      max_bp = std::max(max_bp, bp);
    }
  }
  candidates.push_back(max_bp + 1.0);  // flat tail; attains the eps = 0 supremum
  BetaDual best{-kInf, 0.0};
  for (double lam : candidates) {
    double g = lam * (1.0 - eps);
    for (std::size_t z = 0; z < p.size(); ++z) g -= std::max(0.0, lam * p[z] - q[z]);
    if (g > best.value) best = {g, lam};
  }
  best.value = std::max(best.value, 0.0);
  return best;
}

/// eps-information-spectrum divergence D_s^eps(P || Q): the supremum of
/// thresholds gamma with Pr_P(log P/Q <= gamma) <= eps.
struct DsResult {
  double value = 0.0;          // extended real, nats
  double achieved_tail = 0.0;  // Pr(log P/Q <= value)
  bool infinite_ratio_present = false;
};

inline DsResult ds_epsilon(const Distribution& p, const Distribution& q, double eps) {
  detail::check(p.size() == q.size(), "ds_epsilon: P and Q must share an alphabet");
  detail::check(eps >= 0.0 && eps < 1.0, "ds_epsilon: eps must lie in [0,1)");
  detail::LevelDecomposition dec = detail::merged_levels(p.probs(), q.probs());

  DsResult res;
  for (std::size_t z = 0; z < p.size(); ++z)
    if (p[z] > 0.0 && q[z] <= 0.0) res.infinite_ratio_present = true;

  // The CDF of the log ratio under P is a right-continuous step function
  // over the levels; the feasible set {gamma : CDF(gamma) <= eps} is an
  // interval whose supremum is the first level where the CDF exceeds eps.
  double cum = 0.0;
  for (const auto& lv : dec.levels) {
    cum += lv.p_mass;
    if (cum > eps) {
      res.value = lv.value;
      res.achieved_tail = cum;
      return res;
    }
  }
  // All mass at finite levels fits under eps; only +inf levels can carry
  // the rest, so the supremum is +inf.
  res.value = kInf;
  res.achieved_tail = 1.0;
  return res;
}

/// Numerical check of the sandwich
///   D_s^eps <= -log beta_eps <= D_s^{eps+zeta} + log(1/zeta).
struct Lemma1Report {
  double ds_eps = 0.0;
  double neg_log_beta = 0.0;
  double ds_eps_plus_zeta = 0.0;
  double log_inv_zeta = 0.0;
  double upper = 0.0;
  bool holds = false;
};

inline Lemma1Report lemma1_check(const Distribution& p, const Distribution& q, double eps,
                                 double zeta) {
  detail::check(eps >= 0.0 && eps < 1.0, "lemma1_check: eps must lie in [0,1)");
  detail::check(zeta > 0.0 && zeta < 1.0 - eps, "lemma1_check: zeta must lie in (0, 1-eps)");
  Lemma1Report rep;
  rep.ds_eps = ds_epsilon(p, q, eps).value;
  double beta = beta_epsilon(p, q, eps).beta;
  rep.neg_log_beta = beta > 0.0 ? -std::log(beta) : kInf;
  rep.ds_eps_plus_zeta = ds_epsilon(p, q, eps + zeta).value;
  rep.log_inv_zeta = std::log(1.0 / zeta);
  rep.upper = rep.ds_eps_plus_zeta + rep.log_inv_zeta;  // inf-safe: inf + finite = inf
  const double slack = 1e-9;
  bool lower_ok = !(rep.ds_eps > rep.neg_log_beta + slack);
  bool upper_ok = !(rep.neg_log_beta > rep.upper + slack);
  rep.holds = lower_ok && upper_ok;
  return rep;
}

}  // namespace idbounds

#endif  // IDBOUNDS_TESTING_HPP
