#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "regionboot/rejection_lab.hpp"

using namespace regionboot;

namespace {

RejectionRow quad_row(Method m, const Region& r, double u, double alpha = 0.05) {
  return rejection_probability(m, r, r.boundary_point(u), alpha, Scheme::quad);
}

}  // namespace

TEST(Rejection, BootstrapProbabilityOnCone) {
  const Region cone = Region::cone();
  EXPECT_NEAR(quad_row(Method::bp, cone, 0.0).prob, 0.1339, 5e-5);
  EXPECT_NEAR(quad_row(Method::bp, cone, 3.0).prob, 0.05027, 5e-6);
  EXPECT_NEAR(quad_row(Method::bp, cone, 1.0).prob, 0.06678, 1e-4);
}

TEST(Rejection, McbOnCone) {
  const Region cone = Region::cone();
  EXPECT_NEAR(quad_row(Method::mcb, cone, 0.0).prob, 0.05, 5e-6);
  EXPECT_NEAR(quad_row(Method::mcb, cone, 3.0).prob, 0.02766, 1e-4);
  EXPECT_THROW(quad_row(Method::mcb, Region::efron(0.1), 0.0), InvalidArgument);
}

TEST(Rejection, SignedLrOnHalfPlaneIsExact) {
  const Region flat = Region::flat();
  for (double u : default_u_list()) EXPECT_NEAR(quad_row(Method::signed_lr, flat, u).prob, 0.05, 1e-10);
  for (double a : {0.01, 0.1}) EXPECT_NEAR(quad_row(Method::lr, flat, 0.0, a).prob, a, 1e-10);
}

TEST(Rejection, ClassicMethodsOnCone) {
  const Region cone = Region::cone();
  const double slr0 = quad_row(Method::signed_lr, cone, 0.0).prob;
  const double lr0 = quad_row(Method::lr, cone, 0.0).prob;
  EXPECT_GT(slr0, 0.05);
  EXPECT_NEAR(quad_row(Method::signed_lr, cone, 3.0).prob, 0.05, 1e-3);
  EXPECT_LT(lr0, slr0);
  EXPECT_LT(quad_row(Method::confset, cone, 0.0).prob, lr0);
}

TEST(Rejection, DoubleBootstrapFarFromVertex) {
  const Region cone = Region::cone();
  const auto row = rejection_probability(Method::dbp, cone, cone.boundary_point(3.0), 0.05, Scheme::quad,
                                         expensive_budget());
  EXPECT_NEAR(row.prob, 0.04905, 3e-3);
  EXPECT_EQ(row.detail["dense_fallbacks"], 0);
}

TEST(Rejection, MonteCarloAgrees) {
  const Region cone = Region::cone();
  RejectionBudget b;
  b.replicates = 200000;
  b.seed = 21;
  for (Method m : {Method::bp, Method::mcb, Method::lr}) {
    const auto mc = rejection_probability(m, cone, cone.boundary_point(0.5), 0.05, Scheme::mc, b);
    const double q = quad_row(m, cone, 0.5).prob;
    EXPECT_LE(std::abs(mc.prob - q), 4.0 * mc.detail["stderr"].get<double>()) << to_string(m);
    const auto again = rejection_probability(m, cone, cone.boundary_point(0.5), 0.05, Scheme::mc, b);
    EXPECT_EQ(mc.prob, again.prob);
  }
}

TEST(Rejection, CenterMustLieOnBoundary) {
  EXPECT_THROW(rejection_probability(Method::bp, Region::cone(), Point{0.0, 0.1}, 0.05, Scheme::quad),
               CenterOffBoundary);
  EXPECT_THROW(rejection_probability(Method::bp, Region::cone(), Point{0.0, 0.0}, 1.5, Scheme::quad),
               InvalidArgument);
}

TEST(Rejection, SlicesAreMonotone) {
  for (const Region& r : {Region::cone(), Region::efron(0.1), Region::sphere(3.0)})
    for (Method m : {Method::bp, Method::lr, Method::signed_lr, Method::confset, Method::au2, Method::au3})
      for (double u : {-1.0, 0.0, 0.6, 2.0})
        EXPECT_TRUE(slice_is_monotone(m, r, u, -r.h(u) - 2.0, -r.h(u) + 4.0)) << to_string(m) << " u=" << u;
  for (double u : {0.0, 1.5}) EXPECT_TRUE(slice_is_monotone(Method::mcb, Region::cone(), u, -3.0, 3.0));
  EXPECT_TRUE(slice_is_monotone(Method::dbp, Region::cone(), 0.8, -2.0, 3.0, 9));
}

TEST(Table2, RowOrderAndCsv) {
  const auto rows = table2(Region::cone(), {0.0, 3.0}, 0.05, {Method::mcb, Method::bp}, Scheme::quad);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].method, Method::mcb);
  EXPECT_EQ(rows[1].u, 3.0);
  EXPECT_EQ(rows[2].method, Method::bp);
  const std::string csv = table2_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "method,u,alpha,prob,scheme");
  EXPECT_NE(csv.find("\nbp,3,0.050000000000000003,"), std::string::npos);
  EXPECT_THROW(table2(Region::cone(), {0.0}, 0.05, {}, Scheme::quad), InvalidArgument);
}

TEST(Table1, SelectedEntries) {
  const auto reps = table1(table1_cases(), {Method::bp, Method::dau, Method::mcb});
  ASSERT_EQ(reps.size(), 4u);
  EXPECT_NEAR(reps[0].results[0].p, 0.018, 5e-4);
  EXPECT_NEAR(reps[3].results[1].p, 0.037, 1e-3);
  EXPECT_NEAR(reps[1].results[2].p, 0.069, 5e-4);
  EXPECT_FALSE(reps[0].results[2].available);
  EXPECT_THROW(table1(table1_cases(), {}), InvalidArgument);
}

TEST(Ladder, BootstrapProbabilityIsFirstOrder) {
  const auto rep = epsilon_ladder(LadderFamily{}, {0.1, 0.05, 0.025, 0.0125}, Method::bp);
  EXPECT_NEAR(rep.slope, 1.0, 0.3);
  for (const auto& p : rep.points) EXPECT_GT(p.bias, 0.0);
}

TEST(Ladder, OraclePValueIsFourthOrder) {
  const auto rep = epsilon_ladder(LadderFamily{}, {0.1, 0.05, 0.025, 0.0125}, Method::pv_oracle);
  EXPECT_GE(rep.slope, 3.5);
}

TEST(Ladder, SlopeOfExactPowerLaw) {
  std::vector<LadderPoint> pts;
  for (double e : {0.4, 0.2, 0.1}) pts.push_back({e, 0.0, 3.0 * e * e * e});
  EXPECT_NEAR(loglog_slope(pts), 3.0, 1e-12);
}
