#include "evtest/evidence.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

using namespace evtest;

namespace {

constexpr double kTight = 1e-12;
const ShapeClass kShapes[] = {ShapeClass::Plain, ShapeClass::Symmetric, ShapeClass::Unimodal,
                              ShapeClass::UnimodalSymmetric};

std::vector<double> z_grid() {
  std::vector<double> zs;
  for (int i = -400; i <= 2000; ++i) zs.push_back(0.005 * i);
  for (double z : {1e-8, 1e-3, 20.0, 1e3, 1e8}) zs.push_back(z);
  std::sort(zs.begin(), zs.end());
  return zs;
}

}  // namespace

TEST(Standardize, AffineMap) {
  EXPECT_DOUBLE_EQ(standardize(3.0, {0.0, 1.0}), 3.0);
  EXPECT_DOUBLE_EQ(standardize(5.0, {1.0, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(standardize(-0.7, {-0.7, 13.0}), 0.0);
}

TEST(Standardize, RejectsNonFinite) {
  EXPECT_THROW(standardize(std::nan(""), {0.0, 1.0}), Error);
  EXPECT_THROW(standardize(std::numeric_limits<double>::infinity(), {0.0, 1.0}), Error);
}

TEST(MeanVarSpec, Validation) {
  EXPECT_THROW((MeanVarSpec{0.0, 0.0}.validate()), Error);
  EXPECT_THROW((MeanVarSpec{0.0, -1.0}.validate()), Error);
  EXPECT_THROW((MeanVarSpec{std::nan(""), 1.0}.validate()), Error);
  EXPECT_NO_THROW((MeanVarSpec{0.0, 1.0}.validate()));
}

TEST(EValue, WorkedExampleAtThree) {
  EXPECT_NEAR(e_value(3.0, ShapeClass::Plain), 9.0, kTight);
  EXPECT_NEAR(e_value(3.0, ShapeClass::Symmetric), 18.0, kTight);
  EXPECT_NEAR(e_value(3.0, ShapeClass::Unimodal), 9.0, kTight);
  EXPECT_NEAR(e_value(3.0, ShapeClass::UnimodalSymmetric), 18.0, kTight);
}

TEST(EValue, ZeroBelowMean) {
  for (ShapeClass s : kShapes) {
    EXPECT_EQ(e_value(-1.0, s), 0.0);
    EXPECT_EQ(e_value(0.0, s), 0.0);
  }
}

TEST(PValue, WorkedExampleAtThree) {
  EXPECT_NEAR(p_value(3.0, ShapeClass::Plain), 0.1, kTight);
  EXPECT_NEAR(p_value(3.0, ShapeClass::Symmetric), 1.0 / 18.0, kTight);
  EXPECT_NEAR(p_value(3.0, ShapeClass::Unimodal), 2.0 / 45.0, kTight);
  EXPECT_NEAR(p_value(3.0, ShapeClass::UnimodalSymmetric), 2.0 / 81.0, kTight);
}

TEST(PValue, OneAtOrBelowMean) {
  for (ShapeClass s : kShapes) {
    EXPECT_EQ(p_value(0.0, s), 1.0);
    EXPECT_EQ(p_value(-2.5, s), 1.0);
  }
}

TEST(PValue, BreakpointValues) {
  EXPECT_NEAR(p_value(1.0, ShapeClass::Symmetric), 0.5, kTight);
  EXPECT_NEAR(p_value(std::sqrt(5.0 / 3.0), ShapeClass::Unimodal), 1.0 / 6.0, kTight);
  EXPECT_NEAR(p_value(std::sqrt(4.0 / 3.0), ShapeClass::UnimodalSymmetric), 1.0 / 6.0, kTight);
}

// Each branch of the piecewise tables, written out separately.
TEST(PValue, BranchContinuity) {
  const auto p0 = [](double z) { return 1.0 / (1.0 + z * z); };

  const double z_s = 1.0;
  EXPECT_LT(std::abs(0.5 / (z_s * z_s) - p0(z_s)), kTight);

  const double z_u = std::sqrt(5.0 / 3.0);
  EXPECT_LT(std::abs(4.0 / 9.0 * p0(z_u) - (4.0 / 3.0 * p0(z_u) - 1.0 / 3.0)), kTight);

  const double z_us = std::sqrt(4.0 / 3.0);
  EXPECT_LT(std::abs(2.0 / (9.0 * z_us * z_us) - (0.5 - std::sqrt(3.0) / 6.0 * z_us)), kTight);

  // The implementation agrees with both sides just around each breakpoint.
  for (double eps : {1e-9, -1e-9}) {
    EXPECT_NEAR(p_value(z_s + eps, ShapeClass::Symmetric), 0.5, 1e-8);
    EXPECT_NEAR(p_value(z_u + eps, ShapeClass::Unimodal), 1.0 / 6.0, 1e-8);
    EXPECT_NEAR(p_value(z_us + eps, ShapeClass::UnimodalSymmetric), 1.0 / 6.0, 1e-8);
  }
}

TEST(Evidence, InfiniteObservationLimits) {
  const double inf = std::numeric_limits<double>::infinity();
  for (ShapeClass s : kShapes) {
    EXPECT_EQ(e_value(inf, s), inf);
    EXPECT_EQ(p_value(inf, s), 0.0);
  }
  EXPECT_THROW(e_value(std::nan(""), ShapeClass::Plain), Error);
  EXPECT_THROW(p_value(std::nan(""), ShapeClass::Plain), Error);
}

TEST(EvidenceProperties, RangeMonotonicityAndCalibration) {
  const auto zs = z_grid();
  for (ShapeClass s : kShapes) {
    double prev_p = 1.0;
    double prev_e = 0.0;
    for (double z : zs) {
      const double p = p_value(z, s);
      const double e = e_value(z, s);
      ASSERT_GE(p, 0.0);
      ASSERT_LE(p, 1.0);
      ASSERT_GE(e, 0.0);
      ASSERT_LE(p, prev_p) << "z=" << z;
      ASSERT_GE(e, prev_e) << "z=" << z;
      ASSERT_LE(p, std::min(1.0, 1.0 / e) + 1e-15) << "z=" << z;
      prev_p = p;
      prev_e = e;
    }
  }
}

TEST(EvidenceProperties, BaselineRelation) {
  for (double z : z_grid())
    ASSERT_DOUBLE_EQ(p_value(z, ShapeClass::Plain), 1.0 / (1.0 + e_value(z, ShapeClass::Plain)));
}

TEST(EvidenceProperties, ShapeOrdering) {
  for (double z : z_grid()) {
    const double p0 = p_value(z, ShapeClass::Plain);
    const double ps = p_value(z, ShapeClass::Symmetric);
    const double pu = p_value(z, ShapeClass::Unimodal);
    const double pus = p_value(z, ShapeClass::UnimodalSymmetric);
    if (z <= 0.0) {
      ASSERT_EQ(pus, 1.0);
      ASSERT_EQ(pu, 1.0);
      ASSERT_EQ(ps, 1.0);
      continue;
    }
    ASSERT_LE(pus, std::min(pu, ps)) << "z=" << z;
    if (z >= std::sqrt(5.0 / 3.0) && p0 > 0.0 && z < 1e7) {
      ASSERT_GT(p0, ps) << "z=" << z;
      ASSERT_GT(ps, pu) << "z=" << z;
      ASSERT_GT(pu, pus) << "z=" << z;
    }
  }
}

TEST(EvidenceProperties, ClosedFormsAboveUnimodalBreakpoint) {
  for (double z = std::sqrt(5.0 / 3.0); z < 30.0; z += 0.37) {
    const double p0 = p_value(z, ShapeClass::Plain);
    EXPECT_NEAR(p_value(z, ShapeClass::Symmetric), p0 / (2.0 * (1.0 - p0)), 1e-14);
    EXPECT_NEAR(p_value(z, ShapeClass::Unimodal), 4.0 / 9.0 * p0, 1e-14);
    EXPECT_NEAR(p_value(z, ShapeClass::UnimodalSymmetric), 2.0 * p0 / (9.0 * (1.0 - p0)), 1e-14);
  }
}

TEST(TwoSided, Examples) {
  EXPECT_DOUBLE_EQ(e_value_two_sided(3.0, 0.0, 0.0, 1.0), 9.0);
  EXPECT_DOUBLE_EQ(e_value_two_sided(2.0, -1.0, 1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(e_value_two_sided(0.5, 0.0, 1.0, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(e_value_two_sided(-3.0, -1.0, 1.0, 2.0), 1.0);
}

TEST(TwoSided, ZeroExactlyInsideInterval) {
  for (double x = -3.0; x <= 3.0; x += 0.01) {
    const bool inside = x >= -0.5 && x <= 1.25;
    EXPECT_EQ(e_value_two_sided(x, -0.5, 1.25, 0.8) == 0.0, inside) << x;
  }
}

TEST(TwoSided, PointNullIsSquaredStandardization) {
  for (int i = 0; i < 1000; ++i) {
    const double x = -10.0 + 0.02 * i;
    const double expected = (x - 0.3) * (x - 0.3) / (1.7 * 1.7);
    EXPECT_NEAR(e_value_two_sided(x, 0.3, 0.3, 1.7), expected, 1e-12 * std::max(1.0, expected));
  }
}

TEST(TwoSided, InvalidInterval) {
  EXPECT_THROW(e_value_two_sided(0.0, 1.0, 0.0, 1.0), Error);
  EXPECT_THROW(e_value_two_sided(0.0, 0.0, 1.0, 0.0), Error);
}

TEST(Hypothesis, TwoSidedOnlyWithPlainShape) {
  Hypothesis h{{0.0, 1.0}, ShapeClass::Symmetric, TwoSided{-1.0, 1.0}};
  EXPECT_THROW(h.validate(), Error);
  h.shape = ShapeClass::Plain;
  EXPECT_NO_THROW(h.validate());
  h.side = TwoSided{1.0, -1.0};
  EXPECT_THROW(h.validate(), Error);
}

TEST(Evaluate, OneSidedUsesStandardizedValue) {
  const Hypothesis h{{1.0, 2.0}, ShapeClass::UnimodalSymmetric, OneSidedUpper{}};
  const Evidence ev = evaluate(7.0, h);
  EXPECT_NEAR(ev.e, 18.0, kTight);
  EXPECT_NEAR(ev.p, 2.0 / 81.0, kTight);
}

TEST(Evaluate, TwoSidedUsesMarkovCalibration) {
  const Hypothesis h{{0.0, 1.0}, ShapeClass::Plain, TwoSided{-1.0, 1.0}};
  const Evidence far = evaluate(-5.0, h);
  EXPECT_DOUBLE_EQ(far.e, 16.0);
  EXPECT_DOUBLE_EQ(far.p, 1.0 / 16.0);
  const Evidence near = evaluate(1.5, h);
  EXPECT_DOUBLE_EQ(near.e, 0.25);
  EXPECT_DOUBLE_EQ(near.p, 1.0);
}

TEST(QuantileBound, UnimodalSymmetricExamples) {
  EXPECT_NEAR(quantile_bound_us(1.0 / 6.0), std::sqrt(4.0 / 3.0), kTight);
  EXPECT_NEAR(quantile_bound_us(0.5), 0.0, kTight);
  EXPECT_NEAR(quantile_bound_us(1.0 / 18.0), 2.0, kTight);
  EXPECT_EQ(quantile_bound_us(0.75), 0.0);
  EXPECT_THROW(quantile_bound_us(0.0), Error);
  EXPECT_THROW(quantile_bound_us(1.0), Error);
  EXPECT_THROW(quantile_bound_us(-0.2), Error);
}

TEST(QuantileBound, UnimodalSymmetricBranchesMeet) {
  const double a = 1.0 / 6.0;
  EXPECT_NEAR(std::sqrt(2.0 / (9.0 * a)), std::sqrt(3.0) * (1.0 - 2.0 * a), kTight);
  EXPECT_NEAR(quantile_bound_us(a + 1e-12), quantile_bound_us(a), 1e-9);
}

TEST(QuantileBound, UnimodalExamples) {
  EXPECT_NEAR(quantile_bound_unimodal(1.0 / 6.0), std::sqrt(5.0 / 3.0), kTight);
  // At 4/9 the first term vanishes; (3 - 4/3) / (1 + 4/3) = 5/7.
  EXPECT_NEAR(quantile_bound_unimodal(4.0 / 9.0), std::sqrt(5.0 / 7.0), kTight);
  EXPECT_LT(quantile_bound_unimodal(1.0 - 1e-9), 1e-4);
  EXPECT_THROW(quantile_bound_unimodal(0.0), Error);
  EXPECT_THROW(quantile_bound_unimodal(1.0), Error);
}

// The p-variables are the quantile bounds inverted: plugging the worst-case
// (1 - alpha)-quantile back in returns alpha.
TEST(QuantileBound, DualToPValues) {
  for (int i = 1; i < 500; ++i) {
    const double alpha = 0.001 * i;
    EXPECT_NEAR(p_value(quantile_bound_us(alpha), ShapeClass::UnimodalSymmetric), alpha, 1e-10) << alpha;
  }
  for (int i = 1; i < 1000; ++i) {
    const double alpha = 0.001 * i;
    EXPECT_NEAR(p_value(quantile_bound_unimodal(alpha), ShapeClass::Unimodal), alpha, 1e-10) << alpha;
  }
}
