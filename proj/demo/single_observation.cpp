// Evidence from one observation under each shape class, and the quantile
// bounds that make the p-values tight.

#include <cstdio>

#include "evtest/evtest.hpp"

int main() {
  using namespace evtest;
  const ShapeClass shapes[] = {ShapeClass::Plain, ShapeClass::Symmetric, ShapeClass::Unimodal,
                               ShapeClass::UnimodalSymmetric};

  std::printf("%6s", "z");
  for (ShapeClass s : shapes) std::printf("  %10s e %10s p", std::string(to_string(s)).c_str(), "");
  std::printf("\n");
  for (double z : {-1.0, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0}) {
    std::printf("%6.2f", z);
    for (ShapeClass s : shapes) std::printf("  %12.5g %12.5g", e_value(z, s), p_value(z, s));
    std::printf("\n");
  }

  std::printf("\nsmallest z with p <= alpha\n%8s %12s %12s\n", "alpha", "unimodal", "us");
  for (double alpha : {0.01, 0.05, 0.1, 0.2}) {
    std::printf("%8.2f %12.6f %12.6f\n", alpha, quantile_bound_unimodal(alpha), quantile_bound_us(alpha));
  }

  // Interval null [mu_L, mu_U]: evidence grows on either side.
  std::printf("\ntwo-sided, mu in [-0.5, 0.5], sigma = 1\n");
  for (double x : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
    const Evidence ev = evaluate(x, Hypothesis{{0.0, 1.0}, ShapeClass::Plain, TwoSided{-0.5, 0.5}});
    std::printf("x = %5.1f  e = %8.4f  p = %.4f\n", x, ev.e, ev.p);
  }
}
