#pragma once

// Bet-fraction selection rules for wealth processes.
//
// e-value strategies bet on the factor 1 - lambda + lambda * E; the GRAPA
// family bets directly on bounded observations through 1 + lambda * (X - mu).

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "evtest/error.hpp"
#include "evtest/golden.hpp"

namespace evtest {

/// Average of constant-lambda processes over a fixed grid.
struct EMixture {
  std::vector<double> grid;

  /// lambda in {0.01, 0.02, ..., 0.20}.
  static EMixture default_grid() {
    EMixture m;
    for (int k = 1; k <= 20; ++k) m.grid.push_back(0.01 * k);
    return m;
  }
};

/// Empirical growth-rate maximizer over past e-values, capped.
struct EGree {
  double cap = 0.5;
};

/// Growth-rate root of the past observations (exact), or the Taylor plug-in
/// when exact is false.
struct Grapa {
  double c = 0.5;
  bool exact = true;
};

/// Taylor-expansion plug-in version of GRAPA.
struct Agrapa {
  double c = 0.5;
};

using BettingStrategy = std::variant<EMixture, EGree, Grapa, Agrapa>;

inline std::string strategy_name(const BettingStrategy& s) {
  struct Visitor {
    std::string operator()(const EMixture&) const { return "emixture"; }
    std::string operator()(const EGree&) const { return "egree"; }
    std::string operator()(const Grapa& g) const { return g.exact ? "grapa" : "agrapa"; }
    std::string operator()(const Agrapa&) const { return "agrapa"; }
  };
  return std::visit(Visitor{}, s);
}

inline void validate(const BettingStrategy& s) {
  struct Visitor {
    void operator()(const EMixture& m) const {
      if (m.grid.empty()) throw Error("mixture grid must be nonempty");
      for (double l : m.grid)
        if (!(l >= 0.0 && l < 1.0)) throw Error("mixture grid values must lie in [0, 1)");
    }
    void operator()(const EGree& g) const {
      if (!(g.cap > 0.0 && g.cap < 1.0)) throw Error("GREE cap must lie in (0, 1)");
    }
    void operator()(const Grapa& g) const {
      if (!(g.c > 0.0 && g.c <= 1.0)) throw Error("GRAPA c must lie in (0, 1]");
    }
    void operator()(const Agrapa& g) const {
      if (!(g.c > 0.0 && g.c <= 1.0)) throw Error("aGRAPA c must lie in (0, 1]");
    }
  };
  std::visit(Visitor{}, s);
}

/// Mean log growth of betting lambda on each of the given e-values.
inline double mean_log_growth(std::span<const double> evalues, double lambda) {
  double acc = 0.0;
  for (double e : evalues) acc += std::log1p(lambda * (e - 1.0));
  return acc / static_cast<double>(evalues.size());
}

/// GREE bet fraction: argmax over [0, 1) of the mean log growth on the past
/// e-values, capped at `cap`. The objective is concave, so the derivative
/// signs at the ends of [0, cap] settle the boundary cases exactly and the
/// interior case is a golden-section search.
inline double gree_lambda(std::span<const double> history, double cap = 0.5) {
  if (history.empty()) throw Error("gree_lambda needs a nonempty history");
  if (!(cap > 0.0 && cap < 1.0)) throw Error("GREE cap must lie in (0, 1)");

  double slope_at_zero = 0.0;
  double slope_at_cap = 0.0;
  for (double e : history) {
    if (!(e >= 0.0)) throw Error("e-values must be nonnegative");
    slope_at_zero += e - 1.0;
    slope_at_cap += (e - 1.0) / (1.0 + cap * (e - 1.0));
  }
  if (slope_at_zero <= 0.0) return 0.0;
  if (slope_at_cap >= 0.0) return cap;

  return golden_section_maximize([&](double l) { return mean_log_growth(history, l); }, 0.0, cap,
                                 1e-9);
}

/// Admissible GRAPA bet range [-c/(1-mu), c/mu], or [0, c/mu] for one-sided use.
struct LambdaRange {
  double lo;
  double hi;
  double clamp(double l) const { return l < lo ? lo : (l > hi ? hi : l); }
};

inline LambdaRange grapa_range(double mu, double c, bool nonnegative) {
  if (!(mu > 0.0 && mu < 1.0)) throw Error("GRAPA requires 0 < mu < 1");
  if (!(c > 0.0 && c <= 1.0)) throw Error("GRAPA c must lie in (0, 1]");
  return {nonnegative ? 0.0 : -c / (1.0 - mu), c / mu};
}

/// Sample mean and population variance (denominator n).
struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double var = 0.0;
};

inline Moments sample_moments(std::span<const double> xs) {
  Moments m;
  m.n = xs.size();
  if (m.n == 0) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(m.n);
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  m.var = ss / static_cast<double>(m.n);
  return m;
}

/// Approximate GRAPA bet from the running mean and variance of the previous
/// observations. No history means no bet.
inline double agrapa_lambda(std::size_t n_prev, double mean_prev, double var_prev, double mu, double c,
                            bool nonnegative = false) {
  const LambdaRange range = grapa_range(mu, c, nonnegative);
  if (n_prev == 0) return 0.0;
  const double diff = mean_prev - mu;
  if (diff == 0.0) return 0.0;
  return range.clamp(diff / (var_prev + diff * diff));
}

/// Exact GRAPA bet: the root in lambda of sum_j (X_j - mu) / (1 + lambda (X_j - mu)),
/// clamped to the admissible range. The sum is strictly decreasing in lambda,
/// so its signs at the range ends decide whether the root is interior.
inline double grapa_lambda_exact(std::span<const double> history, double mu, double c,
                                 bool nonnegative = false) {
  const LambdaRange range = grapa_range(mu, c, nonnegative);
  if (history.empty()) throw Error("grapa_lambda_exact needs a nonempty history");
  bool informative = false;
  for (double x : history) {
    if (!(x >= 0.0 && x <= 1.0)) throw Error("GRAPA observations must lie in [0, 1]");
    informative = informative || x != mu;
  }
  // Every lambda solves the equation when all observations sit at mu.
  if (!informative) return range.clamp(0.0);

  const auto score = [&](double l) {
    double acc = 0.0;
    for (double x : history) {
      const double d = x - mu;
      if (d == 0.0) continue;
      const double denom = 1.0 + l * d;
      if (denom <= 0.0) return d > 0.0 ? std::numeric_limits<double>::infinity()
                                       : -std::numeric_limits<double>::infinity();
      acc += d / denom;
    }
    return acc;
  };

  if (score(range.hi) >= 0.0) return range.hi;
  if (score(range.lo) <= 0.0) return range.lo;
  double lo = range.lo;
  double hi = range.hi;
  while (hi - lo > 1e-12 * std::max(1.0, std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    if (score(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace evtest
