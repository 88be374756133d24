#pragma once

// Sequential e-processes built by betting: M_t = prod_i (1 - l_i + l_i E_i)
// for e-value strategies, M_t = prod_i (1 + l_i (X_i - mu)) for GRAPA.
// Each bet l_i is a function of the data strictly before X_i.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "evtest/betting.hpp"
#include "evtest/error.hpp"
#include "evtest/evidence.hpp"

namespace evtest {

struct EProcessState {
  std::size_t t = 0;
  double wealth = 1.0;
  /// One wealth per grid point (EMixture only).
  std::vector<double> per_lambda_wealth;
  /// Past e-values for e-value strategies, past raw observations for GRAPA.
  std::vector<double> history;
  /// Bet used at each step; empty for EMixture.
  std::vector<double> lambdas;
  /// M_1, ..., M_t.
  std::vector<double> trajectory;
  Hypothesis hypothesis;
  BettingStrategy strategy = EGree{};
};

inline bool bets_on_observations(const BettingStrategy& s) {
  return std::holds_alternative<Grapa>(s) || std::holds_alternative<Agrapa>(s);
}

/// Mean tested by a GRAPA-family process and whether bets are restricted to
/// be nonnegative (one-sided null).
inline std::pair<double, bool> grapa_target(const Hypothesis& h) {
  if (const auto* ts = std::get_if<TwoSided>(&h.side)) {
    if (ts->mu_lower != ts->mu_upper)
      throw Error("GRAPA two-sided testing needs a point null (mu_lower == mu_upper)");
    return {ts->mu_lower, false};
  }
  return {h.spec.mu, true};
}

/// The bet a state would place on its next observation, computed from a
/// history prefix alone.
inline double bet_fraction(const BettingStrategy& strategy, const Hypothesis& h,
                           std::span<const double> history) {
  struct Visitor {
    const Hypothesis& h;
    std::span<const double> history;

    double operator()(const EMixture&) const {
      throw Error("the mixture strategy has no single bet fraction");
    }
    double operator()(const EGree& g) const {
      return history.empty() ? 0.0 : gree_lambda(history, g.cap);
    }
    double operator()(const Grapa& g) const {
      const auto [mu, nonneg] = grapa_target(h);
      if (history.empty()) return 0.0;
      if (g.exact) return grapa_lambda_exact(history, mu, g.c, nonneg);
      const Moments m = sample_moments(history);
      return agrapa_lambda(m.n, m.mean, m.var, mu, g.c, nonneg);
    }
    double operator()(const Agrapa& g) const {
      const auto [mu, nonneg] = grapa_target(h);
      const Moments m = sample_moments(history);
      return agrapa_lambda(m.n, m.mean, m.var, mu, g.c, nonneg);
    }
  };
  return std::visit(Visitor{h, history}, strategy);
}

inline EProcessState eprocess_init(const Hypothesis& hypothesis, const BettingStrategy& strategy) {
  hypothesis.validate();
  validate(strategy);
  if (bets_on_observations(strategy)) {
    const auto [mu, nonneg] = grapa_target(hypothesis);
    (void)nonneg;
    if (!(mu > 0.0 && mu < 1.0))
      throw Error("GRAPA strategies assume support [0, 1] and need 0 < mu < 1");
  }
  EProcessState s;
  s.hypothesis = hypothesis;
  s.strategy = strategy;
  if (const auto* mix = std::get_if<EMixture>(&strategy)) s.per_lambda_wealth.assign(mix->grid.size(), 1.0);
  return s;
}

/// Feeds one observation and returns the new wealth M_t.
inline double eprocess_update(EProcessState& s, double x) {
  if (!std::isfinite(x)) throw Error("invalid observation");

  if (bets_on_observations(s.strategy)) {
    if (!(x >= 0.0 && x <= 1.0)) throw Error("GRAPA observations must lie in [0, 1]");
    const double lambda = bet_fraction(s.strategy, s.hypothesis, s.history);
    const double mu = grapa_target(s.hypothesis).first;
    const double factor = 1.0 + lambda * (x - mu);
    s.wealth *= factor > 0.0 ? factor : 0.0;
    s.lambdas.push_back(lambda);
    s.history.push_back(x);
  } else {
    const double e = evaluate(x, s.hypothesis).e;
    if (const auto* mix = std::get_if<EMixture>(&s.strategy)) {
      double total = 0.0;
      for (std::size_t k = 0; k < mix->grid.size(); ++k) {
        const double l = mix->grid[k];
        s.per_lambda_wealth[k] *= 1.0 - l + l * e;
        total += s.per_lambda_wealth[k];
      }
      s.wealth = total / static_cast<double>(mix->grid.size());
    } else {
      const double lambda = bet_fraction(s.strategy, s.hypothesis, s.history);
      s.wealth *= 1.0 - lambda + lambda * e;
      s.lambdas.push_back(lambda);
    }
    s.history.push_back(e);
  }

  ++s.t;
  s.trajectory.push_back(s.wealth);
  return s.wealth;
}

/// Runs a fresh process over a whole sequence and returns its trajectory.
inline std::vector<double> run_eprocess(const Hypothesis& h, const BettingStrategy& strategy,
                                        std::span<const double> xs) {
  EProcessState s = eprocess_init(h, strategy);
  for (double x : xs) eprocess_update(s, x);
  return std::move(s.trajectory);
}

/// Average of two processes fed the same stream; the lower one sees -x.
inline double two_sided_avg_process(const EProcessState& upper, const EProcessState& lower) {
  if (upper.t != lower.t) throw Error("averaged processes must have consumed the same number of observations");
  return 0.5 * (upper.wealth + lower.wealth);
}

/// Two-sided test of E[X] in [mu_lower, mu_upper] that keeps the shape-based
/// e-values by averaging an upper test of E[X] <= mu_upper with an upper test
/// of E[-X] <= -mu_lower.
class AveragedTwoSided {
public:
  AveragedTwoSided(double mu_lower, double mu_upper, double sigma, ShapeClass shape,
                   const BettingStrategy& strategy) {
    if (!(mu_lower <= mu_upper)) throw Error("two-sided interval requires mu_lower <= mu_upper");
    if (bets_on_observations(strategy))
      throw Error("the averaged two-sided process needs an e-value strategy");
    upper_ = eprocess_init(Hypothesis{{mu_upper, sigma}, shape, OneSidedUpper{}}, strategy);
    lower_ = eprocess_init(Hypothesis{{-mu_lower, sigma}, shape, OneSidedUpper{}}, strategy);
  }

  double update(double x) {
    eprocess_update(upper_, x);
    eprocess_update(lower_, -x);
    const double m = two_sided_avg_process(upper_, lower_);
    trajectory_.push_back(m);
    return m;
  }

  const EProcessState& upper() const { return upper_; }
  const EProcessState& lower() const { return lower_; }
  const std::vector<double>& trajectory() const { return trajectory_; }

private:
  EProcessState upper_;
  EProcessState lower_;
  std::vector<double> trajectory_;
};

/// First time (1-based) each threshold is reached; nullopt when never.
struct DetectionReport {
  std::vector<double> thresholds;
  std::vector<std::optional<std::size_t>> crossing_index;
};

inline DetectionReport first_crossing(std::span<const double> trajectory, std::span<const double> thresholds) {
  if (thresholds.empty()) throw Error("at least one threshold is required");
  for (double th : thresholds)
    if (!(th > 1.0) || !std::isfinite(th)) throw Error("thresholds must be finite and greater than 1");
  for (double m : trajectory)
    if (!(m >= 0.0)) throw Error("e-process values must be nonnegative");

  DetectionReport r;
  r.thresholds.assign(thresholds.begin(), thresholds.end());
  r.crossing_index.reserve(thresholds.size());
  for (double th : thresholds) {
    std::optional<std::size_t> hit;
    for (std::size_t t = 0; t < trajectory.size(); ++t) {
      if (trajectory[t] >= th) {
        hit = t + 1;
        break;
      }
    }
    r.crossing_index.push_back(hit);
  }
  return r;
}

inline const std::vector<double>& default_thresholds() {
  static const std::vector<double> th{2.0, 5.0, 10.0, 20.0};
  return th;
}

}  // namespace evtest
