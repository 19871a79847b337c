#pragma once

// Conventional tests: likelihood ratio, signed likelihood ratio, the
// confidence-set test and multiple comparisons with the best (MCB) for the
// cone v <= -|u| / sqrt(3).

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>

#include <boost/math/tools/roots.hpp>

#include "regionboot/errors.hpp"
#include "regionboot/numeric.hpp"
#include "regionboot/regions.hpp"

namespace regionboot {

inline double lr_pvalue(double lambda_hat) { return chisq_sf(lambda_hat * lambda_hat, 1.0); }

inline double signed_lr_pvalue(double lambda_hat) { return normal_sf(lambda_hat); }

/// P(chi2_{q+1} >= lambda^2) outside H, 1 inside.
inline double confset_pvalue(double lambda_hat, int q) {
  if (lambda_hat <= 0.0) return 1.0;
  return chisq_sf(lambda_hat * lambda_hat, q + 1.0);
}

inline double lr_pvalue(const Region& r, std::span<const double> y) { return lr_pvalue(r.project(y).lambda_hat); }

inline double signed_lr_pvalue(const Region& r, std::span<const double> y) {
  return signed_lr_pvalue(r.project(y).lambda_hat);
}

inline double confset_pvalue(const Region& r, std::span<const double> y) {
  return confset_pvalue(r.project(y).lambda_hat, r.q());
}

// ---------------------------------------------------------------------------
// MCB

/// t = sqrt(n) max(x2 - x1, x3 - x1) in the (u, v) coordinates.
inline double mcb_statistic(double u, double v) {
  return (std::sqrt(6.0) * v + std::numbers::sqrt2 * std::abs(u)) / 2.0;
}

/// (u, v) from three group means with n observations each.
inline std::pair<double, double> mcb_coordinates(const std::array<double, 3>& eta, double n) {
  return {std::sqrt(n / 2.0) * (eta[2] - eta[1]), std::sqrt(n / 6.0) * (eta[1] + eta[2] - 2.0 * eta[0])};
}

/// P(T >= t) at the least favourable configuration, 1 - E[Phi(Z + t)^2].
inline double mcb_pvalue_t(double t) {
  static const NormalRule rule = make_normal_rule({}, QuadratureOptions{10.0, 1.0, 20});
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double x = rule.nodes[i] + t;
    acc += rule.weights[i] * normal_sf(x) * (1.0 + normal_cdf(x));
  }
  return acc;
}

inline double mcb_pvalue(double u, double v) { return mcb_pvalue_t(mcb_statistic(u, v)); }

/// t_alpha with P(T >= t_alpha) = alpha.
inline double mcb_threshold(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("mcb_threshold", "alpha must lie in (0, 1)");
  auto f = [alpha](double t) { return mcb_pvalue_t(t) - alpha; };
  double lo = -1.0, hi = 1.0;
  while (f(lo) < 0.0) lo *= 2.0;
  while (f(hi) > 0.0) hi *= 2.0;
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(
      f, lo, hi, [](double a, double b) { return std::abs(b - a) < 1e-12; }, iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace regionboot
