#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "regionboot/classic_tests.hpp"

using namespace regionboot;

namespace {

const Point kY1{0.71, 1.63};
const Point kY2{3.18, 0.20};
const Point kY1Exact{1.0 / std::numbers::sqrt2, 1.632993161855452};

double round1(double pct) { return std::round(pct * 10.0) / 10.0; }

}  // namespace

TEST(ClassicTests, EfronWorkedExample) {
  const Region r = Region::efron(0.1);
  EXPECT_NEAR(lr_pvalue(r, kY1Exact), 0.064, 5e-4);
  EXPECT_NEAR(signed_lr_pvalue(r, kY1Exact), 0.032, 5e-4);
  EXPECT_NEAR(confset_pvalue(r, kY1Exact), 0.181, 5e-4);
  EXPECT_NEAR(lr_pvalue(r, kY1), 0.0646, 5e-5);
  EXPECT_NEAR(chisq_sf(3.42, 1.0), 0.064, 5e-4);
  EXPECT_NEAR(chisq_sf(3.42, 2.0), 0.181, 5e-4);
}

TEST(ClassicTests, ConeClosedForms) {
  const Region r = Region::cone();
  const double l1 = std::hypot(0.71, 1.63);
  EXPECT_NEAR(lr_pvalue(r, kY1), chisq_sf(l1 * l1, 1.0), 1e-14);
  EXPECT_NEAR(confset_pvalue(r, kY1), std::exp(-l1 * l1 / 2.0), 1e-14);
  EXPECT_NEAR(round1(100 * lr_pvalue(r, kY1Exact)), 7.5, 1e-9);
  EXPECT_NEAR(round1(100 * confset_pvalue(r, kY1Exact)), 20.5, 1e-9);
  EXPECT_NEAR(round1(100 * signed_lr_pvalue(r, kY1Exact)), 3.8, 1e-9);
  EXPECT_NEAR(signed_lr_pvalue(r, kY2), normal_sf(1.7632), 1e-4);
  EXPECT_NEAR(round1(100 * signed_lr_pvalue(r, kY2)), 3.9, 1e-9);
}

TEST(ClassicTests, BoundaryAndInterior) {
  const Region r = Region::cone();
  EXPECT_NEAR(lr_pvalue(r, Point{0.0, 0.0}), 1.0, 1e-15);
  EXPECT_NEAR(confset_pvalue(r, Point{0.0, 0.0}), 1.0, 1e-15);
  EXPECT_NEAR(signed_lr_pvalue(r, Point{0.0, 0.0}), 0.5, 1e-15);
  EXPECT_NEAR(signed_lr_pvalue(-2.0), 0.977, 5e-4);
  EXPECT_EQ(confset_pvalue(-0.5, 1), 1.0);
}

TEST(ClassicTests, LrIsTwoSidedSignedLr) {
  for (double l : {0.1, 0.9, 1.85, 3.2}) EXPECT_NEAR(lr_pvalue(l), 2.0 * signed_lr_pvalue(l), 1e-14);
  for (const auto& y : {kY1, kY2}) {
    const Region r = Region::efron(0.1);
    EXPECT_NEAR(lr_pvalue(r, y), 2.0 * signed_lr_pvalue(r, y), 1e-14);
  }
}

TEST(Mcb, WorkedExamples) {
  EXPECT_NEAR(mcb_statistic(kY1[0], kY1[1]), 2.498, 5e-4);
  EXPECT_NEAR(mcb_statistic(kY2[0], kY2[1]), 2.4935, 1e-4);
  EXPECT_NEAR(mcb_statistic(kY1Exact[0], kY1Exact[1]), 2.5, 1e-12);
  EXPECT_NEAR(mcb_pvalue(kY1[0], kY1[1]), 0.069, 5e-4);
  EXPECT_NEAR(mcb_pvalue(kY2[0], kY2[1]), 0.069, 5e-4);
}

TEST(Mcb, ZeroStatistic) {
  EXPECT_NEAR(mcb_pvalue_t(0.0), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(mcb_threshold(2.0 / 3.0), 0.0, 1e-9);
}

TEST(Mcb, ThresholdInvertsTail) {
  EXPECT_NEAR(mcb_threshold(0.069), 2.50, 0.005);
  for (double a : {0.01, 0.05, 0.2, 0.5}) EXPECT_NEAR(mcb_pvalue_t(mcb_threshold(a)), a, 1e-10);
  double prev = std::numeric_limits<double>::infinity();
  for (double a : {1e-6, 1e-4, 1e-2, 0.1, 0.5}) {
    const double t = mcb_threshold(a);
    EXPECT_LT(t, prev);
    prev = t;
  }
  EXPECT_THROW(mcb_threshold(0.0), InvalidArgument);
  EXPECT_THROW(mcb_threshold(1.0), InvalidArgument);
}

TEST(Mcb, TailIsStrictlyDecreasing) {
  double prev = 1.0;
  for (double t = -2.0; t <= 5.0; t += 0.1) {
    const double p = mcb_pvalue_t(t);
    EXPECT_LT(p, prev);
    prev = p;
  }
}

TEST(Mcb, MatchesMaxOfCorrelatedNormals) {
  // T = max(Z2 - Z1, Z3 - Z1) for independent standard normals.
  std::mt19937_64 gen(11);
  std::normal_distribution<double> n01;
  constexpr int N = 400000;
  const double t = 1.3;
  int hits = 0;
  for (int i = 0; i < N; ++i) {
    const double z1 = n01(gen), z2 = n01(gen), z3 = n01(gen);
    if (std::max(z2 - z1, z3 - z1) >= t) ++hits;
  }
  const double p = static_cast<double>(hits) / N;
  EXPECT_NEAR(p, mcb_pvalue_t(t), 4.0 * std::sqrt(p * (1 - p) / N));
}

TEST(Mcb, CoordinateIdentity) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> eta(-2.0, 2.0);
  std::uniform_int_distribution<int> nobs(1, 200);
  for (int i = 0; i < 100; ++i) {
    const std::array<double, 3> e{eta(gen), eta(gen), eta(gen)};
    const double n = nobs(gen);
    const auto [u, v] = mcb_coordinates(e, n);
    const double direct = std::sqrt(n) * std::max(e[1] - e[0], e[2] - e[0]);
    EXPECT_NEAR(mcb_statistic(u, v), direct, 1e-12 * std::max(1.0, std::abs(direct)));
  }
}

TEST(Mcb, ExactLevelAtVertex) {
  const double ta = mcb_threshold(0.05);
  const auto f = [ta](double u) {
    return 2.0 * normal_pdf(u) * normal_sf((2.0 * ta - std::numbers::sqrt2 * u) / std::sqrt(6.0));
  };
  const double p = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-13);
  EXPECT_NEAR(p, 0.05, 1e-6);
}
