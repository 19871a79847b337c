#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "regionboot/regions.hpp"

using namespace regionboot;

namespace {

const Point kY1{0.71, 1.63};
const Point kY2{3.18, 0.20};

std::vector<Region> builtins() {
  return {Region::efron(0.1), Region::efron(0.5), Region::cone(), Region::flat(), Region::sphere(2.0),
          Region::table({-3, -1, 0, 1, 3}, {1.0, 0.3, 0.1, 0.35, 1.2})};
}

void expect_projection_invariants(const Region& r, const Point& y) {
  const auto p = r.project(y);
  ASSERT_TRUE(p.converged);
  const double d = std::hypot(y[0] - p.mu_hat[0], y[1] - p.mu_hat[1]);
  EXPECT_NEAR(d, std::abs(p.lambda_hat), 1e-9);
  EXPECT_LE(std::abs(p.mu_hat[1] + r.h(p.mu_hat[0])), 1e-9);
  if (std::abs(p.lambda_hat) > 1e-9) {
    EXPECT_EQ(p.lambda_hat > 0, !r.contains(y));
  }
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> du(-0.5, 0.5);
  for (int k = 0; k < 100; ++k) {
    const double u = p.u_hat[0] + du(gen);
    const double hu = r.h(u);
    if (!std::isfinite(hu)) continue;
    EXPECT_GE(std::hypot(y[0] - u, y[1] + hu), d - 1e-9);
  }
}

}  // namespace

TEST(Project, EfronWorkedExample) {
  const auto p = Region::efron(0.1).project(kY1);
  EXPECT_NEAR(p.mu_hat[0], 0.12, 0.005);
  EXPECT_NEAR(p.mu_hat[1], -0.12, 0.005);
  EXPECT_NEAR(p.lambda_hat, 1.85, 0.005);
}

TEST(Project, ConeVertexFoot) {
  const auto p = Region::cone().project(kY1);
  EXPECT_NEAR(p.mu_hat[0], 0.0, 1e-12);
  EXPECT_NEAR(p.mu_hat[1], 0.0, 1e-12);
  EXPECT_NEAR(p.lambda_hat, std::hypot(0.71, 1.63), 1e-12);
}

TEST(Project, ConeBranchFoot) {
  const auto p = Region::cone().project(kY2);
  const double u = (3.0 * 3.18 - std::numbers::sqrt3 * 0.20) / 4.0;
  EXPECT_NEAR(p.mu_hat[0], u, 1e-12);
  EXPECT_NEAR(p.mu_hat[1], -u / std::numbers::sqrt3, 1e-12);
  EXPECT_NEAR(p.mu_hat[0], 2.2984, 1e-4);
  EXPECT_NEAR(p.mu_hat[1], -1.3270, 1e-4);
  EXPECT_NEAR(p.lambda_hat, 1.7632, 1e-4);
}

TEST(Project, ConeAxisTieTakesPositiveFoot) {
  const auto p = Region::cone().project(Point{0.0, -2.0});
  EXPECT_GT(p.u_hat[0], 0.0);
  EXPECT_LT(p.lambda_hat, 0.0);
}

TEST(Project, InvariantsAcrossRegionsAndPoints) {
  const std::vector<Point> ys{kY1, kY2, {0.0, 0.0}, {-1.2, 0.7}, {0.4, -1.5}, {2.0, -0.3}, {-0.2, 3.0}};
  for (const auto& r : builtins())
    for (const auto& y : ys) {
      SCOPED_TRACE(r.to_json().dump() + " y=" + std::to_string(y[0]) + "," + std::to_string(y[1]));
      expect_projection_invariants(r, y);
    }
}

TEST(Project, PolynomialJetRegion) {
  SurfaceJet j(1);
  j.h2(0, 0) = 0.2;
  j.h3(0, 0, 0) = 0.05;
  j.h4(0, 0, 0, 0) = 0.01;
  const Region r = Region::polynomial(j);
  expect_projection_invariants(r, Point{0.3, 1.4});
  expect_projection_invariants(r, Point{-1.0, -0.5});
  const auto p = r.project(Point{0.0, 1.0});
  EXPECT_NEAR(p.u_hat[0], 0.0, 1e-8);
}

TEST(Project, TwoDimensionalJet) {
  SurfaceJet j(2);
  j.h2(0, 0) = 0.15;
  j.h2(1, 1) = 0.05;
  j.h2(0, 1) = 0.02;
  j.h2(1, 0) = 0.02;
  const Region r = Region::polynomial(j);
  const Point y{0.2, -0.4, 1.3};
  const auto p = r.project(y);
  ASSERT_TRUE(p.converged);
  double d2 = 0.0;
  for (int k = 0; k < 3; ++k) d2 += (y[k] - p.mu_hat[k]) * (y[k] - p.mu_hat[k]);
  EXPECT_NEAR(std::sqrt(d2), p.lambda_hat, 1e-9);
  const std::vector<double> uh{p.mu_hat[0], p.mu_hat[1]};
  EXPECT_LE(std::abs(p.mu_hat[2] + r.h(uh)), 1e-9);
}

TEST(Membership, BoundaryConsistency) {
  for (const auto& r : builtins())
    for (double u : {-1.7, -0.4, 0.0, 0.3, 1.9}) {
      const double hu = r.h(u);
      if (!std::isfinite(hu)) continue;
      EXPECT_TRUE(r.contains(Point{u, -hu - 1e-9})) << r.to_json().dump() << " u=" << u;
      EXPECT_FALSE(r.contains(Point{u, -hu + 1e-9})) << r.to_json().dump() << " u=" << u;
    }
}

TEST(JetAt, EfronAtOrigin) {
  const SurfaceJet j = Region::efron(0.1).jet_at(0.0);
  EXPECT_NEAR(j.h0(), 0.1, 1e-15);
  EXPECT_NEAR(j.h1(0), 0.0, 1e-15);
  EXPECT_NEAR(j.h2(0, 0), 5.0 / 3.0, 1e-12);
}

TEST(JetAt, EfronCurvatureMatchesPlaneCurve) {
  const double h0 = 0.1;
  const Region r = Region::efron(h0);
  for (double u : {0.05, 0.3, 1.0, 2.5}) {
    const double h = std::sqrt(h0 * h0 + u * u / 3.0);
    const double d1 = u / (3.0 * h), d2 = h0 * h0 / (3.0 * h * h * h);
    const double expected = d2 / (2.0 * std::pow(1.0 + d1 * d1, 1.5));
    const std::vector<double> o{0.0};
    EXPECT_NEAR(curvatures_at(r.jet_at(u), o).gamma1, expected, 1e-6) << "u=" << u;
  }
}

TEST(JetAt, CircleCurvature) {
  const Region r = Region::sphere(2.0);
  for (double u : {0.0, 0.5, 1.2}) {
    const std::vector<double> o{0.0};
    EXPECT_NEAR(curvatures_at(r.jet_at(u), o).gamma1, 0.25, 1e-9);
  }
  EXPECT_NEAR(r.jet_at(0.0).h2(0, 0), 0.25, 1e-12);
}

TEST(JetAt, ConeVertexIsNonSmooth) {
  EXPECT_THROW(Region::cone().jet_at(0.0), NonSmoothPoint);
  EXPECT_NO_THROW(Region::cone().jet_at(1.0));
}

TEST(JetAt, TableMatchesFiniteDifferences) {
  const Region r = Region::table({-3, -1, 0, 1, 3}, {1.0, 0.3, 0.1, 0.35, 1.2});
  const double u = 0.4, e = 1e-4;
  const SurfaceJet j = r.jet_at(u);
  EXPECT_NEAR(j.h0(), r.h(u), 1e-14);
  EXPECT_NEAR(j.h1(0), (r.h(u + e) - r.h(u - e)) / (2 * e), 1e-7);
  EXPECT_NEAR(2.0 * j.h2(0, 0), (r.h(u + e) - 2 * r.h(u) + r.h(u - e)) / (e * e), 1e-5);
}

TEST(Region, ScaledBoundary) {
  const Region r = Region::efron(0.3);
  const double c = 0.7;
  const Region s = r.scaled(c);
  for (double u : {0.0, 0.5, 2.0}) EXPECT_NEAR(s.h(u), c * r.h(u / c), 1e-14);
  EXPECT_THROW(r.scaled(0.0), InvalidScale);
}

TEST(Region, DescriptorsRoundTrip) {
  for (const auto& r : builtins()) {
    const Region back = Region::from_json(r.to_json());
    for (double u : {-1.0, 0.2, 1.5}) EXPECT_DOUBLE_EQ(back.h(u), r.h(u));
  }
  EXPECT_NEAR(Region::parse(R"({"kind":"efron","h0":0.1})").h(0.0), 0.1, 1e-15);
  EXPECT_EQ(Region::parse("flat").h(3.0), 0.0);
  EXPECT_NEAR(Region::parse(R"({"kind":"sphere","radius":2})").h(0.0), 0.0, 1e-15);
  EXPECT_NEAR(Region::parse(R"({"kind":"custom","table":[[-1,1],[0,0],[1,1]]})").h(0.0), 0.0, 1e-15);
  EXPECT_THROW(Region::parse(R"({"kind":"torus"})"), InvalidArgument);
  EXPECT_THROW(Region::parse("not json"), InvalidArgument);
  EXPECT_THROW(Region::sphere(-1.0), InvalidArgument);
}

TEST(Region, SphereIsBall) {
  const Region r = Region::sphere(1.5);
  EXPECT_TRUE(r.contains(Point{0.0, -1.5}));
  EXPECT_FALSE(r.contains(Point{0.0, -3.1}));
  EXPECT_FALSE(r.contains(Point{1.6, -1.5}));
  const auto p = r.project(Point{0.0, -1.5 - 2.5});
  EXPECT_NEAR(p.lambda_hat, 1.0, 1e-12);
}
