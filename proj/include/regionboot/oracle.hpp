#pragma once

// Closed-form asymptotic expansions in terms of the signed distance and the
// curvature summaries: bootstrap probability across scales, the
// fourth-order p-value, AU, the double bootstrap probability, and the
// rejection probabilities of NBP and DBP.

#include <cmath>
#include <span>

#include "regionboot/errors.hpp"
#include "regionboot/numeric.hpp"
#include "regionboot/regions.hpp"
#include "regionboot/surface_jets.hpp"

namespace regionboot {

/// Phibar(beta0 / sigma + beta1 sigma + beta2 sigma^3). sigma2 must be positive.
inline double bp_expansion(const GeometricSummary& g, double sigma2) {
  if (!(sigma2 > 0.0)) throw InvalidScale("bp_expansion", "sigma2 must be > 0");
  const double s = std::sqrt(sigma2);
  return normal_sf(g.beta0 / s + g.beta1 * s + g.beta2 * s * sigma2);
}

/// Normalized bootstrap probability z(sigma2) = beta0 + beta1 sigma2 + beta2 sigma2^2,
/// defined for every real sigma2.
inline double nbp_z_expansion(const GeometricSummary& g, double sigma2) {
  return g.beta0 + g.beta1 * sigma2 + g.beta2 * sigma2 * sigma2;
}

inline double pv_expansion(const GeometricSummary& g) {
  return normal_sf(g.beta0 - g.beta1 - g.beta2 + g.beta3);
}

inline double au_expansion(const GeometricSummary& g) {
  return normal_sf(nbp_z_expansion(g, -1.0));
}

/// Double bootstrap probability with outer scale tau2, inner scale sigma2 and
/// the center-deviation term kappa_theta.
inline double dbp_expansion(const GeometricSummary& g, double tau2, double sigma2, double kappa_theta = 0.0) {
  if (!(tau2 > 0.0)) throw InvalidScale("dbp_expansion", "tau2 must be > 0");
  const double t = std::sqrt(tau2);
  const double z = g.beta0 / t - g.beta1 * t - g.beta2 * t * tau2 - g.beta3 * t * sigma2 -
                   (tau2 + sigma2) * kappa_theta / t;
  return normal_sf(z);
}

/// Rejection probability of NBP_{sigma2} < alpha at a boundary point with the
/// given curvatures; sigma2 = -1 gives AU.
inline double reject_nbp(const Curvatures& g, double alpha, double sigma2) {
  const double za = normal_quantile(alpha);
  const double a = 1.0 + sigma2;
  const double arg = za +
                     a * (g.gamma1 + za * g.gamma2 + 4.0 / 3.0 * za * za * g.gamma3 - g.gamma1 * g.gamma2) +
                     a * a * (3.0 * g.gamma4 - 4.0 / 3.0 * g.gamma3) - sigma2 * 4.0 / 3.0 * g.gamma3;
  return normal_cdf(arg);
}

/// Rejection probability of DBP_{1,sigma2} < alpha; sigma2 = -1 gives DAU.
inline double reject_dbp(double beta3, double alpha, double sigma2) {
  return normal_cdf(normal_quantile(alpha) - (1.0 + sigma2) * beta3);
}

/// Mean-curvature estimate from the gap between BP and the signed LR p-value.
inline double gamma1_from_bp(double bp_value, double signed_lr) {
  return normal_isf(bp_value) - normal_isf(signed_lr);
}

/// Geometric summary of a region at the projection of y: curvatures at the
/// foot and the signed distance.
inline GeometricSummary summary_at_projection(const Region& region, std::span<const double> y) {
  const ProjectionResult pr = region.project(y);
  const SurfaceJet jet = region.jet_at(pr.u_hat);
  const std::vector<double> origin(region.q(), 0.0);
  return beta_summary(curvatures_at(jet, origin), pr.lambda_hat);
}

/// The fourth-order p-value evaluated with the exact geometry at the projection.
inline double pv_oracle(const Region& region, std::span<const double> y) {
  return pv_expansion(summary_at_projection(region, y));
}

}  // namespace regionboot
