#pragma once

#include <cmath>
#include <concepts>

namespace evtest {

/// Golden-section search for the maximizer of a unimodal function on [lo, hi].
/// Stops once the bracket is narrower than tol and returns its midpoint.
template <std::invocable<double> F>
double golden_section_maximize(F&& f, double lo, double hi, double tol = 1e-9) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace evtest
