#pragma once

// Single-observation p-variables and e-variables for the mean-variance
// hypotheses H, H_S, H_U and H_US, and the worst-case quantile bounds behind
// them. Everything here is pure and operates on doubles.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <variant>

#include "evtest/error.hpp"

namespace evtest {

/// Null mean bound and standard-deviation bound, in data units.
struct MeanVarSpec {
  double mu = 0.0;
  double sigma = 1.0;

  void validate() const {
    if (!std::isfinite(mu) || !std::isfinite(sigma))
      throw Error("mean/variance spec must be finite");
    if (!(sigma > 0.0)) throw Error("sigma must be positive");
  }
};

enum class ShapeClass { Plain, Symmetric, Unimodal, UnimodalSymmetric };

inline std::string_view to_string(ShapeClass s) {
  switch (s) {
    case ShapeClass::Plain: return "plain";
    case ShapeClass::Symmetric: return "symmetric";
    case ShapeClass::Unimodal: return "unimodal";
    case ShapeClass::UnimodalSymmetric: return "us";
  }
  return "?";
}

inline ShapeClass parse_shape(std::string_view name) {
  if (name == "plain" || name == "H") return ShapeClass::Plain;
  if (name == "symmetric" || name == "sym" || name == "S") return ShapeClass::Symmetric;
  if (name == "unimodal" || name == "uni" || name == "U") return ShapeClass::Unimodal;
  if (name == "us" || name == "unimodal-symmetric" || name == "US")
    return ShapeClass::UnimodalSymmetric;
  throw Error("unknown shape '" + std::string(name) + "'");
}

/// Tests E[X] <= mu.
struct OneSidedUpper {};

/// Tests E[X] in [mu_lower, mu_upper].
struct TwoSided {
  double mu_lower = 0.0;
  double mu_upper = 0.0;
};

using Sidedness = std::variant<OneSidedUpper, TwoSided>;

struct Hypothesis {
  MeanVarSpec spec;
  ShapeClass shape = ShapeClass::Plain;
  Sidedness side = OneSidedUpper{};

  bool two_sided() const { return std::holds_alternative<TwoSided>(side); }

  void validate() const {
    spec.validate();
    if (const auto* ts = std::get_if<TwoSided>(&side)) {
      if (!std::isfinite(ts->mu_lower) || !std::isfinite(ts->mu_upper))
        throw Error("two-sided interval must be finite");
      if (ts->mu_lower > ts->mu_upper) throw Error("two-sided interval requires mu_lower <= mu_upper");
      // The factor-two improvements do not carry over to the interval null;
      // symmetric two-sided testing goes through the averaged process instead.
      if (shape != ShapeClass::Plain) throw Error("two-sided hypotheses support only the plain shape");
    }
  }
};

/// One e-value and one p-value computed from the same observation.
struct Evidence {
  double e = 0.0;
  double p = 1.0;
};

inline double standardize(double x, const MeanVarSpec& spec) {
  if (!std::isfinite(x)) throw Error("invalid observation");
  return (x - spec.mu) / spec.sigma;
}

namespace detail {

inline double positive_part_sq(double z) {
  const double zp = z > 0.0 ? z : 0.0;
  return zp * zp;
}

inline void require_not_nan(double z) {
  if (std::isnan(z)) throw Error("standardized value is NaN");
}

}  // namespace detail

/// e-variable for a standardized observation z. Increasing in z, zero for z <= 0.
inline double e_value(double z, ShapeClass shape) {
  detail::require_not_nan(z);
  const double e0 = detail::positive_part_sq(z);
  switch (shape) {
    case ShapeClass::Plain:
    case ShapeClass::Unimodal:
      return e0;
    case ShapeClass::Symmetric:
    case ShapeClass::UnimodalSymmetric:
      return 2.0 * e0;
  }
  return e0;
}

/// p-variable for a standardized observation z. Decreasing in z, one for z <= 0.
inline double p_value(double z, ShapeClass shape) {
  detail::require_not_nan(z);
  const double e0 = detail::positive_part_sq(z);
  const double p0 = 1.0 / (1.0 + e0);
  switch (shape) {
    case ShapeClass::Plain:
      return p0;
    case ShapeClass::Symmetric:
      // (2 e0)^-1 is +inf at e0 == 0, so the min falls back to p0 there.
      return std::min(1.0 / (2.0 * e0), p0);
    case ShapeClass::Unimodal:
      return std::max(4.0 / 9.0 * p0, (4.0 * p0 - 1.0) / 3.0);
    case ShapeClass::UnimodalSymmetric:
      if (e0 >= 4.0 / 3.0) return 2.0 / (9.0 * e0);
      if (e0 > 0.0) return (3.0 - std::sqrt(3.0 * e0)) / 6.0;
      return 1.0;
  }
  return p0;
}

/// Precise e-variable for E[X] in [mu_lower, mu_upper], Var(X) <= sigma^2.
inline double e_value_two_sided(double x, double mu_lower, double mu_upper, double sigma) {
  if (!std::isfinite(x)) throw Error("invalid observation");
  if (!(mu_lower <= mu_upper)) throw Error("two-sided interval requires mu_lower <= mu_upper");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error("sigma must be positive");
  const double above = x > mu_upper ? x - mu_upper : 0.0;
  const double below = x < mu_lower ? mu_lower - x : 0.0;
  return (above * above + below * below) / (sigma * sigma);
}

/// Evidence from a raw observation under a full hypothesis.
///
/// Two-sided hypotheses have no dedicated p-variable; their p-value is the
/// Markov calibration min{1, 1/e}.
inline Evidence evaluate(double x, const Hypothesis& h) {
  if (const auto* ts = std::get_if<TwoSided>(&h.side)) {
    const double e = e_value_two_sided(x, ts->mu_lower, ts->mu_upper, h.spec.sigma);
    return {e, e > 1.0 ? 1.0 / e : 1.0};
  }
  const double z = standardize(x, h.spec);
  return {e_value(z, h.shape), p_value(z, h.shape)};
}

/// Worst-case (1 - alpha)-quantile of X over unimodal-symmetric laws with
/// mean 0 and variance at most 1. Defined for alpha in (0, 1); the bound is 0
/// for alpha >= 1/2.
inline double quantile_bound_us(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
  if (alpha <= 1.0 / 6.0) return std::sqrt(2.0 / (9.0 * alpha));
  if (alpha <= 0.5) return std::sqrt(3.0) * (1.0 - 2.0 * alpha);
  return 0.0;
}

/// Worst-case (1 - alpha)-quantile of X over unimodal laws with mean 0 and
/// variance at most 1.
inline double quantile_bound_unimodal(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
  const double tail = 4.0 / (9.0 * alpha) - 1.0;
  const double first = tail > 0.0 ? std::sqrt(tail) : 0.0;
  const double second = std::sqrt((3.0 - 3.0 * alpha) / (1.0 + 3.0 * alpha));
  return std::max(first, second);
}

}  // namespace evtest
