#pragma once

// Batch methods: Fisher and Simes combinations of per-observation
// p-values, and the sample-mean e-/p-variables (which need independence).

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "evtest/error.hpp"
#include "evtest/evidence.hpp"

namespace evtest {

namespace detail {

inline void require_pvalues(std::span<const double> ps) {
  if (ps.empty()) throw Error("at least one p-value is required");
  for (double p : ps)
    if (!(p >= 0.0 && p <= 1.0)) throw Error("p-values must lie in [0, 1]");
}

}  // namespace detail

/// Chi-square survival function for even degrees of freedom.
inline double chi2_sf(double x, int df) {
  if (df <= 0 || df % 2 != 0) throw Error("chi2_sf supports only positive even degrees of freedom");
  if (!(x >= 0.0)) throw Error("chi2_sf needs x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

/// 1 - F_{chi2, 2n}(-2 sum log P_i). Inputs below 1e-300 are clamped.
inline double fisher_combine(std::span<const double> ps) {
  detail::require_pvalues(ps);
  double stat = 0.0;
  for (double p : ps) stat -= 2.0 * std::log(std::max(p, 1e-300));
  return std::clamp(chi2_sf(stat, 2 * static_cast<int>(ps.size())), 0.0, 1.0);
}

/// min_i (n / i) P_(i), capped at 1.
inline double simes_combine(std::span<const double> ps) {
  detail::require_pvalues(ps);
  std::vector<double> sorted(ps.begin(), ps.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double best = 1.0;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    best = std::min(best, n / static_cast<double>(i + 1) * sorted[i]);
  return best;
}

namespace detail {

/// n (T - mu)_+^2 / sigma^2 for the sample mean T.
inline double batch_e0(std::span<const double> xs, const MeanVarSpec& spec) {
  if (xs.empty()) throw Error("batch methods need at least one observation");
  spec.validate();
  double sum = 0.0;
  for (double x : xs) {
    if (!std::isfinite(x)) throw Error("invalid observation");
    sum += x;
  }
  const double n = static_cast<double>(xs.size());
  const double excess = std::max(sum / n - spec.mu, 0.0);
  return n * excess * excess / (spec.sigma * spec.sigma);
}

}  // namespace detail

/// e-variable from the sample mean. Unimodality of the data does not carry
/// over to the mean, so only symmetry doubles the value.
inline double e_batch(std::span<const double> xs, const MeanVarSpec& spec, ShapeClass shape) {
  const double e0 = detail::batch_e0(xs, spec);
  const bool symmetric = shape == ShapeClass::Symmetric || shape == ShapeClass::UnimodalSymmetric;
  return symmetric ? 2.0 * e0 : e0;
}

inline double p_batch(std::span<const double> xs, const MeanVarSpec& spec, ShapeClass shape) {
  const double e0 = detail::batch_e0(xs, spec);
  const double p0 = 1.0 / (1.0 + e0);
  const bool symmetric = shape == ShapeClass::Symmetric || shape == ShapeClass::UnimodalSymmetric;
  return symmetric ? std::min(1.0 / (2.0 * e0), p0) : p0;
}

}  // namespace evtest
