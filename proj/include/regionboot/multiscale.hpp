#pragma once

// Scaling curves of the bootstrap probability across variance scales and
// their extrapolation to sigma2 = -1: normalized BP, AU2/AU3 and the
// multiscale-double bootstrap DAU.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "regionboot/bp_engine.hpp"
#include "regionboot/errors.hpp"
#include "regionboot/numeric.hpp"

namespace regionboot {

enum class CurveKind { bp, dbp };
enum class Extrapolation { fit, taylor };

inline std::string to_string(CurveKind k) { return k == CurveKind::bp ? "bp" : "dbp"; }
inline std::string to_string(Extrapolation e) { return e == Extrapolation::fit ? "fit" : "taylor"; }

inline Extrapolation parse_extrapolation(const std::string& s) {
  if (s == "fit") return Extrapolation::fit;
  if (s == "taylor") return Extrapolation::taylor;
  throw InvalidArgument("extrapolation", "expected fit or taylor, got '" + s + "'");
}

struct ScalingCurve {
  std::vector<double> scales;
  std::vector<double> z;
  std::vector<double> se;       // standard error of each z (0 for quadrature)
  std::vector<double> weights;  // inverse variances, or 1 for quadrature
  CurveKind kind = CurveKind::bp;
  Backend backend = Backend::quad;
  std::uint64_t seed = 0;
  std::uint64_t replicates = 0;

  /// Absolute weights come from binomial variances; otherwise the residual
  /// variance is estimated from the fit.
  bool absolute_weights() const { return backend == Backend::mc; }

  void validate() const {
    const std::size_t n = scales.size();
    if (z.size() != n || se.size() != n || weights.size() != n)
      throw InvalidArgument("ScalingCurve", "scales, z, se and weights must have equal lengths");
    for (std::size_t i = 0; i < n; ++i) {
      if (!(scales[i] > 0.0)) throw InvalidScale("ScalingCurve", "scales must be positive");
      if (i > 0 && !(scales[i] > scales[i - 1])) throw InvalidScale("ScalingCurve", "scales must be strictly increasing");
    }
  }
};

struct FitResult {
  std::vector<double> coeffs;  // ascending powers of sigma2
  Eigen::MatrixXd cov;
  double rss = 0.0;
  int dof = 0;

  double eval(double s2) const {
    double v = 0.0, p = 1.0;
    for (double c : coeffs) {
      v += c * p;
      p *= s2;
    }
    return v;
  }

  double eval_se(double s2) const {
    const auto n = static_cast<Eigen::Index>(coeffs.size());
    Eigen::VectorXd x(n);
    double p = 1.0;
    for (Eigen::Index i = 0; i < n; ++i, p *= s2) x[i] = p;
    return std::sqrt(std::max(0.0, x.dot(cov * x)));
  }
};

/// z(-1) with its standard error and the p-value Phibar(z).
struct Extrapolated {
  double z = 0.0;
  double se = 0.0;
  double p = 0.0;
};

/// Equispaced grid "a:b:n".
inline std::vector<double> scale_grid(double lo, double hi, int n) {
  if (n < 1) throw InvalidArgument("scales", "grid needs at least one point");
  if (!(lo > 0.0) || !(hi >= lo)) throw InvalidScale("scales", "grid must satisfy 0 < a <= b");
  if (n == 1) return {lo};
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
  return g;
}

inline std::vector<double> parse_scale_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw InvalidArgument("scales", "expected a:b:n, got '" + spec + "'");
  try {
    return scale_grid(std::stod(parts[0]), std::stod(parts[1]), std::stoi(parts[2]));
  } catch (const std::logic_error&) {
    throw InvalidArgument("scales", "expected a:b:n, got '" + spec + "'");
  }
}

/// Default grid for Monte Carlo curves.
inline std::vector<double> default_mc_grid() { return scale_grid(0.5, 1.5, 13); }

/// Central-difference stencil used by the taylor extrapolation.
inline std::vector<double> taylor_stencil() { return {0.8, 0.9, 1.0, 1.1, 1.2}; }

namespace detail {

inline double clamp_count(double k, std::uint64_t B) {
  return std::clamp(k, 0.5, static_cast<double>(B) - 0.5);
}

// z = scale * Phibar^{-1}(p) for an MC proportion, with its delta-method variance.
inline std::pair<double, double> mc_z(std::uint64_t k, std::uint64_t B, double scale) {
  const double kk = clamp_count(static_cast<double>(k), B);
  const double p = kk / static_cast<double>(B);
  const TailPair t{p, (static_cast<double>(B) - kk) / static_cast<double>(B)};
  const double z = t.z();
  const double dens = normal_pdf(z);
  const double var = scale * scale * p * (1.0 - p) / (static_cast<double>(B) * dens * dens);
  return {scale * z, var};
}

}  // namespace detail

/// z(sigma2) = sigma Phibar^{-1}(BP_{sigma2}(H|y)) on a grid of scales.
inline ScalingCurve bp_curve(const Region& region, std::span<const double> y, std::vector<double> grid,
                             const BpRequest& req = {}) {
  ScalingCurve c;
  c.kind = CurveKind::bp;
  c.backend = req.backend;
  c.seed = req.backend == Backend::mc ? req.seed : 0;
  c.replicates = req.backend == Backend::mc ? req.replicates : 0;
  c.scales = std::move(grid);
  const std::size_t n = c.scales.size();
  c.z.assign(n, 0.0);
  c.se.assign(n, 0.0);
  c.weights.assign(n, 1.0);
  c.validate();
  parallel_for(n, [&](std::size_t i) {
    const double s2 = c.scales[i];
    if (req.backend == Backend::quad) {
      c.z[i] = std::sqrt(s2) * bp_quad(region, y, s2, req.quad).z();
      return;
    }
    const std::uint64_t k = bp_mc_count(region, y, s2, req.replicates, req.seed, req.stream + static_cast<std::uint32_t>(i));
    const auto [z, var] = detail::mc_z(k, req.replicates, std::sqrt(s2));
    c.z[i] = z;
    c.se[i] = std::sqrt(var);
    c.weights[i] = 1.0 / var;
  });
  return c;
}

/// z(sigma2) = Phibar^{-1}(DBP_{1,sigma2}(H|y)) on a grid of scales.
inline ScalingCurve dbp_curve(const Region& region, std::span<const double> y, std::vector<double> grid,
                              const DbpRequest& req = {}) {
  ScalingCurve c;
  c.kind = CurveKind::dbp;
  c.backend = req.backend;
  c.seed = req.backend == Backend::mc ? req.seed : 0;
  c.replicates = req.backend == Backend::mc ? req.outer_replicates : 0;
  c.scales = std::move(grid);
  const std::size_t n = c.scales.size();
  c.z.assign(n, 0.0);
  c.se.assign(n, 0.0);
  c.weights.assign(n, 1.0);
  c.validate();
  // The projection is shared by every scale.
  DbpRequest r = req;
  if (!r.center) r.center = region.project(y).mu_hat;
  parallel_for(n, [&](std::size_t i) {
    const double s2 = c.scales[i];
    if (req.backend == Backend::quad) {
      c.z[i] = dbp_quad(region, y, 1.0, s2, r.center, r.quad).z();
      return;
    }
    DbpRequest ri = r;
    ri.stream = req.stream + static_cast<std::uint32_t>(i);
    const auto e = dbp(region, y, 1.0, s2, ri);
    const auto k = static_cast<std::uint64_t>(std::llround(e.value * static_cast<double>(e.replicates)));
    const auto [z, var] = detail::mc_z(k, e.replicates, 1.0);
    c.z[i] = z;
    c.se[i] = std::sqrt(var);
    c.weights[i] = 1.0 / var;
  });
  return c;
}

/// Weighted least squares of z on (1, sigma2, ..., sigma2^degree).
inline FitResult fit_poly(const ScalingCurve& curve, int degree) {
  curve.validate();
  const auto n = static_cast<Eigen::Index>(curve.scales.size());
  const Eigen::Index m = degree + 1;
  if (degree < 0) throw InvalidArgument("fit_poly", "degree must be >= 0");
  if (m > n) throw InsufficientScales("fit_poly", "need at least degree + 1 scales");
  Eigen::MatrixXd X(n, m);
  Eigen::VectorXd z(n), sw(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (Eigen::Index j = 0; j < m; ++j, p *= curve.scales[i]) X(i, j) = p;
    z[i] = curve.z[i];
    sw[i] = std::sqrt(curve.weights[i]);
  }
  const Eigen::MatrixXd A = sw.asDiagonal() * X;
  const Eigen::VectorXd b = sw.asDiagonal() * z;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-13);
  if (qr.rank() < m) throw RankDeficient("fit_poly", "design matrix is singular (duplicate scales?)");
  const Eigen::VectorXd beta = qr.solve(b);
  FitResult f;
  f.coeffs.assign(beta.data(), beta.data() + m);
  const Eigen::VectorXd r = b - A * beta;
  f.rss = r.squaredNorm();
  f.dof = static_cast<int>(n - m);
  const Eigen::MatrixXd ata_inv = (A.transpose() * A).inverse();
  if (curve.absolute_weights()) f.cov = ata_inv;
  else f.cov = f.dof > 0 ? Eigen::MatrixXd(ata_inv * (f.rss / f.dof)) : Eigen::MatrixXd::Zero(m, m);
  return f;
}

namespace detail {

inline double value_at(const ScalingCurve& c, double s2) {
  for (std::size_t i = 0; i < c.scales.size(); ++i)
    if (std::abs(c.scales[i] - s2) < 1e-12) return c.z[i];
  throw InsufficientScales("taylor", "curve lacks the stencil scale " + std::to_string(s2));
}

// z(1), z'(1), z''(1) from central differences with one Richardson step.
inline std::array<double, 3> taylor_derivatives(const ScalingCurve& c) {
  constexpr double h = 0.1;
  const double z0 = value_at(c, 1.0);
  const double zp1 = value_at(c, 1.0 + h), zm1 = value_at(c, 1.0 - h);
  const double zp2 = value_at(c, 1.0 + 2 * h), zm2 = value_at(c, 1.0 - 2 * h);
  const double d1h = (zp1 - zm1) / (2 * h), d12h = (zp2 - zm2) / (4 * h);
  const double d2h = (zp1 - 2 * z0 + zm1) / (h * h), d22h = (zp2 - 2 * z0 + zm2) / (4 * h * h);
  return {z0, (4 * d1h - d12h) / 3, (4 * d2h - d22h) / 3};
}

inline double taylor_se(const ScalingCurve& c, int k) {
  // The extrapolation is linear in the stencil values z(0.8), ..., z(1.2).
  constexpr double h = 0.1;
  const std::array<double, 5> d1{1.0 / (12 * h), -2.0 / (3 * h), 0.0, 2.0 / (3 * h), -1.0 / (12 * h)};
  const std::array<double, 5> d2{-1.0 / (12 * h * h), 4.0 / (3 * h * h), -2.5 / (h * h), 4.0 / (3 * h * h),
                                 -1.0 / (12 * h * h)};
  const auto st = taylor_stencil();
  double var = 0.0;
  for (std::size_t j = 0; j < st.size(); ++j) {
    const double w = (j == 2 ? 1.0 : 0.0) - 2.0 * d1[j] + (k >= 3 ? 2.0 * d2[j] : 0.0);
    for (std::size_t i = 0; i < c.scales.size(); ++i)
      if (std::abs(c.scales[i] - st[j]) < 1e-12) var += w * w * c.se[i] * c.se[i];
  }
  return std::sqrt(var);
}

inline Extrapolated extrapolate(const ScalingCurve& curve, int terms, Extrapolation mode) {
  curve.validate();
  Extrapolated e;
  if (mode == Extrapolation::fit) {
    const FitResult f = fit_poly(curve, terms - 1);
    e.z = f.eval(-1.0);
    e.se = f.eval_se(-1.0);
  } else {
    const auto d = taylor_derivatives(curve);
    e.z = d[0] - 2.0 * d[1] + (terms >= 3 ? 2.0 * d[2] : 0.0);
    e.se = taylor_se(curve, terms);
  }
  e.p = normal_sf(e.z);
  return e;
}

}  // namespace detail

/// AU with a k-term model at sigma2 = 1 (k = 2 or 3).
inline Extrapolated au_k(const ScalingCurve& curve, int k, Extrapolation mode) {
  if (curve.kind != CurveKind::bp) throw InvalidArgument("au_k", "curve must be a bp curve");
  if (k != 2 && k != 3) throw InvalidArgument("au_k", "k must be 2 or 3");
  return detail::extrapolate(curve, k, mode);
}

/// DAU: the DBP curve extrapolated linearly to sigma2 = -1.
inline Extrapolated dau(const ScalingCurve& curve, Extrapolation mode) {
  if (curve.kind != CurveKind::dbp) throw InvalidArgument("dau", "curve must be a dbp curve");
  return detail::extrapolate(curve, 2, mode);
}

// ---------------------------------------------------------------------------
// Serialization

inline std::string curve_csv(const ScalingCurve& c) {
  std::ostringstream os;
  os.precision(17);
  os << "sigma2,z,se,kind\n";
  for (std::size_t i = 0; i < c.scales.size(); ++i)
    os << c.scales[i] << ',' << c.z[i] << ',' << c.se[i] << ',' << to_string(c.kind) << '\n';
  return os.str();
}

inline nlohmann::json fit_json(const FitResult& f) {
  nlohmann::json cov = nlohmann::json::array();
  for (Eigen::Index i = 0; i < f.cov.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < f.cov.cols(); ++j) row.push_back(f.cov(i, j));
    cov.push_back(row);
  }
  return {{"coeffs", f.coeffs}, {"cov", cov}, {"rss", f.rss}, {"dof", f.dof}};
}

}  // namespace regionboot
