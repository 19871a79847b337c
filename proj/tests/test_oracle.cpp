#include <gtest/gtest.h>

#include <cmath>

#include "regionboot/bp_engine.hpp"
#include "regionboot/classic_tests.hpp"
#include "regionboot/oracle.hpp"
#include "regionboot/rejection_lab.hpp"

using namespace regionboot;

namespace {

GeometricSummary example_summary() {
  return beta_summary(Curvatures{0.2, 0.02, 0.002, 0.0}, 1.85);
}

GeometricSummary flat_summary(double lambda0) { return beta_summary(Curvatures{}, lambda0); }

}  // namespace

TEST(Expansions, FlatSummaryGivesNormalTail) {
  const auto g = flat_summary(1.85);
  EXPECT_NEAR(bp_expansion(g, 1.0), 0.0322, 5e-5);
  EXPECT_DOUBLE_EQ(pv_expansion(g), normal_sf(1.85));
  EXPECT_DOUBLE_EQ(au_expansion(g), normal_sf(1.85));
  EXPECT_DOUBLE_EQ(dbp_expansion(g, 1.0, 1.0), normal_sf(1.85));
}

TEST(Expansions, HandEvaluatedExample) {
  const auto g = example_summary();
  EXPECT_NEAR(g.beta1, 0.172126, 1e-6);
  EXPECT_NEAR(g.beta2, -0.02 / 3.0, 1e-15);
  EXPECT_NEAR(g.beta3, -0.016, 1e-15);
  EXPECT_NEAR(bp_expansion(g, 1.0), normal_sf(1.85 + g.beta1 + g.beta2), 1e-15);
  EXPECT_NEAR(bp_expansion(g, 1.0), 0.0219, 5e-5);
  EXPECT_NEAR(pv_expansion(g), 0.0476, 5e-5);
  EXPECT_NEAR(au_expansion(g), 0.04734, 5e-6);
  EXPECT_NEAR(dbp_expansion(g, 1.0, 1.0), 0.0445, 5e-5);
}

TEST(Expansions, AuAndPvDifferByCubicTrace) {
  const auto g = beta_summary(Curvatures{0.15, 0.03, 0.008, 0.01}, 1.3);
  EXPECT_NEAR(normal_isf(au_expansion(g)) - normal_isf(pv_expansion(g)), 4.0 / 3.0 * g.gamma3, 1e-12);
}

TEST(Expansions, DbpReductionsAndRobustness) {
  const auto g = example_summary();
  for (double s2 : {0.3, 1.0, 2.0})
    EXPECT_NEAR(dbp_expansion(g, 1.0, s2), normal_sf(g.beta0 - g.beta1 - g.beta2 - g.beta3 * s2), 1e-15);
  for (double tau2 : {0.5, 1.0, 1.7})
    for (double k : {-0.3, 0.0, 0.4})
      EXPECT_NEAR(dbp_expansion(g, tau2, -tau2, k), dbp_expansion(g, tau2, -tau2, 0.0), 1e-15);
  EXPECT_THROW(dbp_expansion(g, 0.0, 1.0), InvalidScale);
  EXPECT_THROW(bp_expansion(g, -1.0), InvalidScale);
}

TEST(Expansions, ConsistencyChains) {
  for (const auto& g : {example_summary(), beta_summary(Curvatures{-0.1, 0.05, -0.01, 0.02}, 0.7)}) {
    EXPECT_NEAR(au_expansion(g), normal_sf(nbp_z_expansion(g, -1.0)), 1e-14);
    EXPECT_DOUBLE_EQ(pv_expansion(g), dbp_expansion(g, 1.0, -1.0, 0.0));
    EXPECT_NEAR(normal_isf(bp_expansion(g, 0.64)) * 0.8, nbp_z_expansion(g, 0.64), 1e-12);
  }
}

TEST(RejectNbp, Examples) {
  EXPECT_NEAR(reject_nbp(Curvatures{}, 0.05, 1.0), 0.05, 1e-15);
  EXPECT_NEAR(reject_nbp(Curvatures{0.1, 0.0, 0.0, 0.0}, 0.05, 1.0), 0.0743, 1e-4);
  EXPECT_NEAR(reject_nbp(Curvatures{0.1, 0.0, 0.0, 0.0}, 0.05, 1.0), normal_cdf(normal_quantile(0.05) + 0.2), 1e-15);
  const Curvatures c3{0.0, 0.0, 0.002, 0.0};
  EXPECT_NEAR(reject_nbp(c3, 0.05, -1.0), normal_cdf(normal_quantile(0.05) + 4.0 / 3.0 * 0.002), 1e-15);
  EXPECT_NEAR(reject_nbp(c3, 0.05, -1.0), 0.0503, 5e-5);
}

TEST(RejectDbp, Examples) {
  EXPECT_NEAR(reject_dbp(0.0, 0.05, 1.0), 0.05, 1e-15);
  EXPECT_NEAR(reject_dbp(0.7, 0.05, -1.0), 0.05, 1e-15);
  EXPECT_NEAR(reject_dbp(-0.016, 0.05, 1.0), 0.0534, 5e-5);
}

TEST(WorkedExample, CurvatureFromBootstrapProbability) {
  const Point y{0.71, 1.63};
  const Region r = Region::efron(0.1);
  const double bpv = bp_quad(r, y, 1.0).p;
  EXPECT_NEAR(normal_isf(bpv), 2.08, 0.02);
  EXPECT_NEAR(gamma1_from_bp(bpv, signed_lr_pvalue(r, y)), 0.23, 0.03);
}

TEST(WorkedExample, ExactCurvatureIsFarFromAsymptotic) {
  const auto g = summary_at_projection(Region::efron(0.1), Point{0.71, 1.63});
  EXPECT_NEAR(g.beta0, 1.85, 0.005);
  EXPECT_GT(g.gamma1, 0.7);
  EXPECT_LT(g.gamma1, 0.9);
  EXPECT_GE(pv_oracle(Region::efron(0.1), Point{0.71, 1.63}), 0.0);
  EXPECT_THROW(pv_oracle(Region::cone(), Point{0.71, 1.63}), NonSmoothPoint);
}

TEST(Ladder, BootstrapProbabilityMatchesExpansion) {
  const LadderFamily fam;
  const Point y{0.3, 1.645};
  std::vector<LadderPoint> pb, pd;
  for (double eps : {0.1, 0.05, 0.025, 0.0125}) {
    const Region r = fam.region(eps);
    const auto g = summary_at_projection(r, y);
    const double eb = bp_quad(r, y, 1.0).p;
    const double ed = dbp_quad(r, y, 1.0, 1.0, std::nullopt).p;
    pb.push_back({eps, eb, std::abs(eb - bp_expansion(g, 1.0))});
    pd.push_back({eps, ed, std::abs(ed - dbp_expansion(g, 1.0, 1.0))});
  }
  EXPECT_GE(loglog_slope(pb), 3.5);
  EXPECT_GE(loglog_slope(pd), 3.0);
}
