#pragma once

// The ten p-value methods behind one interface. Every method is expressed
// through a statistic that increases as the observation moves away from H
// (the z-value for bootstrap methods, the signed distance, the MCB t), so
// that rejection regions on a u-slice are half-lines in v.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <json.hpp>

#include "regionboot/bp_engine.hpp"
#include "regionboot/classic_tests.hpp"
#include "regionboot/errors.hpp"
#include "regionboot/multiscale.hpp"
#include "regionboot/oracle.hpp"
#include "regionboot/regions.hpp"

namespace regionboot {

enum class Method { bp, au2, au3, dbp, dau, mcb, lr, signed_lr, confset, pv_oracle };

inline constexpr std::array<Method, 10> kAllMethods{Method::bp,  Method::au2,       Method::au3,     Method::dbp,
                                                     Method::dau, Method::mcb,       Method::lr,      Method::signed_lr,
                                                     Method::confset, Method::pv_oracle};

inline std::string to_string(Method m) {
  switch (m) {
    case Method::bp: return "bp";
    case Method::au2: return "au2";
    case Method::au3: return "au3";
    case Method::dbp: return "dbp";
    case Method::dau: return "dau";
    case Method::mcb: return "mcb";
    case Method::lr: return "lr";
    case Method::signed_lr: return "signed_lr";
    case Method::confset: return "confset";
    case Method::pv_oracle: return "pv_oracle";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  for (Method m : kAllMethods)
    if (to_string(m) == s) return m;
  throw InvalidArgument("method", "unknown method '" + s + "'");
}

/// Comma-separated method names, or "all".
inline std::vector<Method> parse_methods(const std::string& s) {
  if (s == "all") return {kAllMethods.begin(), kAllMethods.end()};
  std::vector<Method> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t next = std::min(s.find(',', pos), s.size());
    const std::string item = s.substr(pos, next - pos);
    if (!item.empty()) out.push_back(parse_method(item));
    pos = next + 1;
  }
  if (out.empty()) throw InvalidArgument("method", "empty method list");
  return out;
}

struct PValueOptions {
  Backend backend = Backend::quad;
  Extrapolation extrapolation = Extrapolation::taylor;
  std::vector<double> grid;  // empty: taylor stencil for quad, 0.5:1.5:13 for mc
  std::uint64_t replicates = 10000;
  std::uint64_t inner_replicates = 10000;
  std::uint64_t seed = 0;
  EngineOptions quad{};
  double center_shift = 0.0;  // move the DBP center along the boundary by this much in u

  std::vector<double> effective_grid() const {
    if (!grid.empty()) return grid;
    return extrapolation == Extrapolation::taylor ? taylor_stencil() : default_mc_grid();
  }
};

/// MCB is defined for the cone v <= -|u| / sqrt(3) only.
inline bool is_mcb_cone(const Region& r) {
  const auto* c = std::get_if<Region::Cone>(&r.data());
  return c && r.q() == 1 && std::abs(c->slope - 1.0 / std::numbers::sqrt3) < 1e-12;
}

/// Rejection threshold on the statistic: reject when statistic >= threshold.
inline double statistic_threshold(Method m, double alpha, int q) {
  switch (m) {
    case Method::mcb: return mcb_threshold(alpha);
    case Method::confset: return std::sqrt(2.0 * boost::math::gamma_q_inv(0.5 * (q + 1), alpha));
    case Method::lr: return normal_isf(0.5 * alpha);
    default: return normal_isf(alpha);
  }
}

/// Converts a statistic value back to a p-value.
inline double statistic_to_pvalue(Method m, double s, int q) {
  switch (m) {
    case Method::mcb: return mcb_pvalue_t(s);
    case Method::confset: return confset_pvalue(s, q);
    case Method::lr: return lr_pvalue(s);
    default: return normal_sf(s);
  }
}

namespace detail {

inline std::optional<Point> dbp_center(const Region& region, const ProjectionResult& pr, double shift) {
  if (shift == 0.0) return pr.mu_hat;
  if (region.q() != 1) throw UnsupportedDim("dbp", "center shift requires q = 1");
  return region.boundary_point(pr.u_hat[0] + shift);
}

}  // namespace detail

/// Statistic of a method at y (quadrature backend for bootstrap methods);
/// LR uses the signed distance and is rejected two-sided.
inline double method_statistic(Method m, const Region& region, std::span<const double> y,
                               const PValueOptions& opt = {}) {
  switch (m) {
    case Method::mcb:
      if (!is_mcb_cone(region)) throw InvalidArgument("mcb", "MCB is defined only for the cone region");
      return mcb_statistic(y[0], y[1]);
    case Method::lr:
    case Method::signed_lr:
    case Method::confset: return region.project(y).lambda_hat;
    case Method::pv_oracle: {
      const GeometricSummary g = summary_at_projection(region, y);
      return g.beta0 - g.beta1 - g.beta2 + g.beta3;
    }
    case Method::bp: return bp_quad(region, y, 1.0, opt.quad).z();
    case Method::au2:
    case Method::au3: {
      BpRequest req;
      req.quad = opt.quad;
      const auto c = bp_curve(region, y, opt.effective_grid(), req);
      return au_k(c, m == Method::au2 ? 2 : 3, opt.extrapolation).z;
    }
    case Method::dbp:
    case Method::dau: {
      DbpRequest req;
      req.quad = opt.quad;
      req.center = detail::dbp_center(region, region.project(y), opt.center_shift);
      if (m == Method::dbp) return dbp_quad(region, y, 1.0, 1.0, req.center, opt.quad).z();
      const auto c = dbp_curve(region, y, opt.effective_grid(), req);
      return dau(c, opt.extrapolation).z;
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Reports

struct MethodResult {
  Method method = Method::bp;
  bool available = true;
  double p = 0.0;
  double z = 0.0;   // Phibar^{-1}(p) for bootstrap methods, the statistic otherwise
  double se = 0.0;  // standard error of p (Monte Carlo) or of z(-1) extrapolations
  std::string note;
};

struct PValueReport {
  Point y;
  nlohmann::json region;
  double lambda_hat = 0.0;
  Point mu_hat;
  std::vector<MethodResult> results;
};

namespace detail {

inline MethodResult quad_result(Method m, const Region& region, std::span<const double> y, const PValueOptions& opt) {
  MethodResult r;
  r.method = m;
  r.z = method_statistic(m, region, y, opt);
  r.p = statistic_to_pvalue(m, r.z, region.q());
  return r;
}

inline MethodResult mc_result(Method m, const Region& region, std::span<const double> y, const PValueOptions& opt) {
  MethodResult r;
  r.method = m;
  switch (m) {
    case Method::bp: {
      BpRequest req{Backend::mc, opt.replicates, opt.seed, 0, opt.quad};
      const auto e = bp(region, y, 1.0, req);
      r.p = e.value;
      r.se = e.std_error;
      r.z = TailPair{std::clamp(e.value, 0.5 / opt.replicates, 1.0 - 0.5 / opt.replicates),
                     std::clamp(e.complement, 0.5 / opt.replicates, 1.0 - 0.5 / opt.replicates)}
                .z();
      return r;
    }
    case Method::au2:
    case Method::au3: {
      BpRequest req{Backend::mc, opt.replicates, opt.seed, 0, opt.quad};
      const auto c = bp_curve(region, y, opt.effective_grid(), req);
      const auto e = au_k(c, m == Method::au2 ? 2 : 3, opt.extrapolation);
      r.p = e.p;
      r.z = e.z;
      r.se = e.se;
      return r;
    }
    case Method::dbp:
    case Method::dau: {
      DbpRequest req;
      req.backend = Backend::mc;
      req.outer_replicates = opt.replicates;
      req.inner_replicates = opt.inner_replicates;
      req.seed = opt.seed;
      req.quad = opt.quad;
      req.center = dbp_center(region, region.project(y), opt.center_shift);
      if (m == Method::dbp) {
        const auto e = dbp(region, y, 1.0, 1.0, req);
        r.p = e.value;
        r.se = e.std_error;
        r.z = normal_isf(std::clamp(e.value, 0.5 / opt.replicates, 1.0 - 0.5 / opt.replicates));
        return r;
      }
      const auto c = dbp_curve(region, y, opt.effective_grid(), req);
      const auto e = dau(c, opt.extrapolation);
      r.p = e.p;
      r.z = e.z;
      r.se = e.se;
      return r;
    }
    default: return quad_result(m, region, y, opt);
  }
}

}  // namespace detail

/// p-value of one method; throws for methods that do not apply.
inline MethodResult compute_pvalue(Method m, const Region& region, std::span<const double> y,
                                   const PValueOptions& opt = {}) {
  if (opt.backend == Backend::quad || m == Method::mcb || m == Method::lr || m == Method::signed_lr ||
      m == Method::confset || m == Method::pv_oracle)
    return detail::quad_result(m, region, y, opt);
  return detail::mc_result(m, region, y, opt);
}

/// p-values for a list of methods; methods that do not apply are reported
/// as unavailable with the reason.
inline PValueReport compute_pvalues(const Region& region, std::span<const double> y, const std::vector<Method>& methods,
                                    const PValueOptions& opt = {}) {
  PValueReport rep;
  rep.y.assign(y.begin(), y.end());
  rep.region = region.to_json();
  const auto pr = region.project(y);
  rep.lambda_hat = pr.lambda_hat;
  rep.mu_hat = pr.mu_hat;
  rep.results.resize(methods.size());
  for (std::size_t i = 0; i < methods.size(); ++i) {
    try {
      rep.results[i] = compute_pvalue(methods[i], region, y, opt);
    } catch (const NonSmoothPoint& e) {
      rep.results[i] = MethodResult{methods[i], false, 0.0, 0.0, 0.0, e.what()};
    } catch (const InvalidArgument& e) {
      if (methods[i] != Method::mcb) throw;
      rep.results[i] = MethodResult{methods[i], false, 0.0, 0.0, 0.0, e.what()};
    }
  }
  return rep;
}

}  // namespace regionboot
