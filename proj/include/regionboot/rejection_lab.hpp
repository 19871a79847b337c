#pragma once

// Rejection probabilities P_mu( p(Y) < alpha ) of the p-value methods at a
// boundary point mu, by deterministic integration over Y ~ N(mu, I) (q == 1)
// or by Monte Carlo; the two benchmark tables; and the epsilon-ladder
// order-of-accuracy experiments.
//
// Quadrature: integrate over the u-coordinate; on each slice the statistic
// of the method increases in v, so the rejection set is {v >= v*(u)} and
// contributes an exact normal tail. v* is found by secant iteration seeded
// with a linear prediction from the neighbouring slices.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "regionboot/errors.hpp"
#include "regionboot/methods.hpp"
#include "regionboot/numeric.hpp"
#include "regionboot/regions.hpp"
#include "regionboot/rng.hpp"
#include "regionboot/surface_jets.hpp"

namespace regionboot {

enum class Scheme { quad, mc };

inline std::string to_string(Scheme s) { return s == Scheme::quad ? "quad" : "mc"; }

inline Scheme parse_scheme(const std::string& s) {
  if (s == "quad") return Scheme::quad;
  if (s == "mc") return Scheme::mc;
  throw InvalidArgument("scheme", "expected quad or mc, got '" + s + "'");
}

struct RejectionBudget {
  QuadratureOptions outer{8.5, 0.5, 10};
  double v_xtol = 1e-10;
  std::uint64_t replicates = 100000;  // mc scheme
  std::uint64_t seed = 0;

  nlohmann::json to_json() const {
    return {{"outer_truncation", outer.truncation}, {"outer_panel_width", outer.panel_width},
            {"outer_order", outer.order},           {"v_xtol", v_xtol},
            {"replicates", replicates},             {"seed", seed}};
  }
};

/// Cheaper outer rule for methods whose statistic needs scaling curves.
inline RejectionBudget expensive_budget() {
  RejectionBudget b;
  b.outer = QuadratureOptions{7.0, 1.0, 10};
  b.v_xtol = 1e-9;
  return b;
}

inline bool is_curve_method(Method m) {
  return m == Method::au2 || m == Method::au3 || m == Method::dbp || m == Method::dau;
}

struct RejectionRow {
  Method method = Method::bp;
  double u = 0.0;
  double alpha = 0.05;
  double prob = 0.0;
  Scheme scheme = Scheme::quad;
  nlohmann::json detail;
};

namespace detail {

// Mass of N(mean, 1) on { v : stat(v) >= c } by dense scanning, for slices
// where the statistic is not monotone.
template <class F>
double dense_slice_mass(F&& stat_minus_c, double mean) {
  const int n = 721;
  const double lo = mean - 9.0, hi = mean + 9.0, step = (hi - lo) / (n - 1);
  double mass = 0.0;
  double prev_v = lo;
  bool prev_in = stat_minus_c(lo) >= 0.0;
  double start = prev_in ? -std::numeric_limits<double>::infinity() : 0.0;
  for (int k = 1; k < n; ++k) {
    const double v = lo + k * step;
    const bool in = stat_minus_c(v) >= 0.0;
    if (in != prev_in) {
      double a = prev_v, b = v;
      for (int it = 0; it < 60; ++it) {
        const double m = 0.5 * (a + b);
        if ((stat_minus_c(m) >= 0.0) == prev_in) a = m;
        else b = m;
      }
      const double x = 0.5 * (a + b);
      if (in) start = x;
      else mass += normal_cdf(x - mean) - (std::isinf(start) ? 0.0 : normal_cdf(start - mean));
    }
    prev_in = in;
    prev_v = v;
  }
  if (prev_in) mass += (std::isinf(start) ? 1.0 : normal_sf(start - mean));
  return mass;
}

}  // namespace detail

/// P over Y ~ N(mu, I) that the method rejects at level alpha.
inline RejectionRow rejection_probability(Method m, const Region& region, std::span<const double> mu, double alpha,
                                          Scheme scheme, const RejectionBudget& budget = {},
                                          const PValueOptions& opt = {}) {
  if (static_cast<int>(mu.size()) != region.q() + 1) throw InvalidArgument("rejection_probability", "mu must have q + 1 coordinates");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("rejection_probability", "alpha must lie in (0, 1)");
  {
    const auto iv = region.v_interval(mu.first(region.q()));
    const double v = mu[region.q()];
    if (iv.empty() || (std::abs(v - iv.hi) > 1e-9 && std::abs(v - iv.lo) > 1e-9))
      throw CenterOffBoundary("rejection_probability", "mu must lie on the boundary within 1e-9");
  }
  if (m == Method::mcb && !is_mcb_cone(region)) throw InvalidArgument("mcb", "MCB is defined only for the cone region");
  const int q = region.q();
  const double c = statistic_threshold(m, alpha, q);
  const bool two_sided = m == Method::lr;

  RejectionRow row;
  row.method = m;
  row.u = mu[0];
  row.alpha = alpha;
  row.scheme = scheme;
  row.detail = {{"budget", budget.to_json()}};

  if (scheme == Scheme::mc) {
    const std::uint64_t B = budget.replicates;
    const std::size_t chunks = static_cast<std::size_t>((B + kChunkSize - 1) / kChunkSize);
    std::vector<std::uint64_t> counts(chunks, 0);
    const auto stream = 0x40000000u + static_cast<std::uint32_t>(m);
    parallel_for(chunks, [&](std::size_t ch) {
      NormalStream gen(budget.seed, stream, static_cast<std::uint32_t>(ch));
      const std::uint64_t begin = ch * kChunkSize, end = std::min<std::uint64_t>(B, begin + kChunkSize);
      Point y(mu.size());
      std::uint64_t hit = 0;
      for (std::uint64_t b = begin; b < end; ++b) {
        for (std::size_t k = 0; k < y.size(); ++k) y[k] = mu[k] + gen.next();
        const double s = method_statistic(m, region, y, opt);
        hit += (two_sided ? std::abs(s) >= c : s >= c) ? 1 : 0;
      }
      counts[ch] = hit;
    });
    std::uint64_t k = 0;
    for (auto v : counts) k += v;
    row.prob = static_cast<double>(k) / static_cast<double>(B);
    row.detail["stderr"] = std::sqrt(row.prob * (1.0 - row.prob) / static_cast<double>(B));
    return row;
  }

  if (q != 1) throw UnsupportedDim("rejection_probability", "quadrature scheme requires q = 1");
  std::vector<Feature> feats;
  for (const auto& f : region.u_features()) feats.push_back({f.at - mu[0], f.scale});
  const NormalRule rule = make_normal_rule(feats, budget.outer);
  const std::size_t n = rule.size();
  RootOptions ro;
  ro.xtol = budget.v_xtol;
  int fallbacks = 0;

  auto stat = [&](double u, double v) {
    const double y[2] = {u, v};
    return method_statistic(m, region, std::span<const double>(y, 2), opt);
  };
  // Root of stat(u, .) = target near guess; NaN when not found.
  auto root = [&](double u, double target, double guess) {
    return solve_secant([&](double v) { return stat(u, v) - target; }, guess, 1.0, ro);
  };
  auto boundary_v = [&](double u) {
    const auto iv = region.v_interval(u);
    return iv.empty() ? mu[1] : iv.hi;
  };

  std::size_t start = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(rule.nodes[i]) < std::abs(rule.nodes[start])) start = i;

  std::vector<double> upper(n), lower(n), mass(n);
  std::vector<bool> ok(n, true);
  auto predict = [&](const std::vector<double>& r, std::size_t i, std::size_t p1, std::size_t p2, bool two) {
    if (!two || !ok[p1] || !ok[p2]) return ok[p1] ? r[p1] : boundary_v(mu[0] + rule.nodes[i]) + c;
    const double x = rule.nodes[i], x1 = rule.nodes[p1], x2 = rule.nodes[p2];
    return r[p1] + (r[p1] - r[p2]) * (x - x1) / (x1 - x2);
  };
  auto solve_slice = [&](std::size_t i, double gu, double gl) {
    const double u = mu[0] + rule.nodes[i];
    upper[i] = root(u, c, gu);
    if (two_sided) lower[i] = root(u, -c, gl);
    ok[i] = std::isfinite(upper[i]) && (!two_sided || std::isfinite(lower[i]));
    if (ok[i]) {
      mass[i] = normal_sf(upper[i] - mu[1]) + (two_sided ? normal_cdf(lower[i] - mu[1]) : 0.0);
      return;
    }
    ++fallbacks;
    mass[i] = detail::dense_slice_mass(
        [&](double v) {
          const double s = stat(u, v);
          return two_sided ? std::abs(s) - c : s - c;
        },
        mu[1]);
  };

  const double u0 = mu[0] + rule.nodes[start];
  solve_slice(start, boundary_v(u0) + c, boundary_v(u0) - c);
  for (std::size_t i = start + 1; i < n; ++i)
    solve_slice(i, predict(upper, i, i - 1, i - 2, i >= start + 2), predict(lower, i, i - 1, i - 2, i >= start + 2));
  for (std::size_t i = start; i-- > 0;)
    solve_slice(i, predict(upper, i, i + 1, i + 2, i + 2 <= start), predict(lower, i, i + 1, i + 2, i + 2 <= start));

  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += rule.weights[i] * mass[i];
  row.prob = acc;
  row.detail["u_nodes"] = n;
  row.detail["dense_fallbacks"] = fallbacks;
  return row;
}

/// Statistic monotonicity along a u-slice: true when the statistic does not
/// decrease over the sampled v values.
inline bool slice_is_monotone(Method m, const Region& region, double u, double v_lo, double v_hi, int samples = 41,
                              const PValueOptions& opt = {}) {
  double prev = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    const double y[2] = {u, v_lo + (v_hi - v_lo) * k / (samples - 1)};
    const double s = method_statistic(m, region, std::span<const double>(y, 2), opt);
    if (s < prev - 1e-9) return false;
    prev = s;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Tables

inline std::vector<double> default_u_list() { return {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0}; }

inline std::vector<Method> table2_methods() {
  return {Method::bp, Method::au2, Method::au3, Method::dbp, Method::dau, Method::mcb};
}

/// Rows for every (method, u) at mu = (u, -h(u)), in method-then-u order.
inline std::vector<RejectionRow> table2(const Region& region, const std::vector<double>& u_list, double alpha,
                                        const std::vector<Method>& methods, Scheme scheme,
                                        const PValueOptions& opt = {}) {
  if (methods.empty()) throw InvalidArgument("table2", "empty method list");
  std::vector<RejectionRow> rows(methods.size() * u_list.size());
  parallel_for(rows.size(), [&](std::size_t k) {
    const Method m = methods[k / u_list.size()];
    const double u = u_list[k % u_list.size()];
    const Point mu = region.boundary_point(u);
    RejectionBudget budget = is_curve_method(m) ? expensive_budget() : RejectionBudget{};
    rows[k] = rejection_probability(m, region, mu, alpha, scheme, budget, opt);
  });
  return rows;
}

struct Table1Case {
  Point y;
  double h0 = 0.0;
};

/// Observations (1/sqrt 2, sqrt(8/3)) and (3.18, 0.20) against h0 = 0.1 and 0.
inline std::vector<Table1Case> table1_cases() {
  const Point y1{1.0 / std::numbers::sqrt2, std::sqrt(8.0 / 3.0)};
  const Point y2{3.18, 0.20};
  return {{y1, 0.1}, {y1, 0.0}, {y2, 0.1}, {y2, 0.0}};
}

/// Region for a table1 case: the efron surface, or the cone when h0 = 0.
inline Region table1_region(double h0) { return h0 > 0.0 ? Region::efron(h0) : Region::cone(); }

inline std::vector<PValueReport> table1(const std::vector<Table1Case>& cases, const std::vector<Method>& methods,
                                        const PValueOptions& opt = {}) {
  if (methods.empty()) throw InvalidArgument("table1", "empty method list");
  std::vector<PValueReport> out(cases.size());
  parallel_for(cases.size(), [&](std::size_t i) {
    out[i] = compute_pvalues(table1_region(cases[i].h0), cases[i].y, methods, opt);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Epsilon ladder

/// h(u) = eps a u^2 + eps^2 b u^3 + eps^3 c u^4, the class-S scaling of a
/// fixed quartic.
struct LadderFamily {
  double a = 0.5;
  double b = 0.3;
  double c = 0.5;

  SurfaceJet jet(double eps) const {
    SurfaceJet j(1);
    j.h2(0, 0) = eps * a;
    j.h3(0, 0, 0) = eps * eps * b;
    j.h4(0, 0, 0, 0) = eps * eps * eps * c;
    return j;
  }

  Region region(double eps) const { return Region::polynomial(jet(eps)); }
};

struct LadderPoint {
  double eps = 0.0;
  double value = 0.0;
  double bias = 0.0;
};

struct LadderReport {
  std::string probe;
  std::vector<LadderPoint> points;
  double slope = 0.0;
};

/// Least-squares slope of log |bias| against log eps.
inline double loglog_slope(const std::vector<LadderPoint>& pts) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  if (n < 2) throw InvalidArgument("epsilon_ladder", "need at least two ladder points");
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = std::log(pts[i].eps);
    y[i] = std::log(std::max(std::abs(pts[i].bias), 1e-300));
  }
  return X.colPivHouseholderQr().solve(y)[1];
}

/// |rejection probability - alpha| at mu = origin for each eps, and its slope.
inline LadderReport epsilon_ladder(const LadderFamily& family, const std::vector<double>& eps_list, Method probe,
                                   double alpha = 0.05, const PValueOptions& opt = {},
                                   std::optional<RejectionBudget> budget = std::nullopt) {
  LadderReport rep;
  rep.probe = to_string(probe);
  rep.points.resize(eps_list.size());
  const RejectionBudget b = budget ? *budget : (is_curve_method(probe) ? expensive_budget() : RejectionBudget{});
  parallel_for(eps_list.size(), [&](std::size_t i) {
    const Region r = family.region(eps_list[i]);
    const Point mu{0.0, 0.0};
    const auto row = rejection_probability(probe, r, mu, alpha, Scheme::quad, b, opt);
    rep.points[i] = {eps_list[i], row.prob, row.prob - alpha};
  });
  rep.slope = loglog_slope(rep.points);
  return rep;
}

// ---------------------------------------------------------------------------
// Output

namespace detail {

inline std::string fmt_number(double v, int digits = 17) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

}  // namespace detail

inline std::string table2_csv(const std::vector<RejectionRow>& rows) {
  std::ostringstream os;
  os << "method,u,alpha,prob,scheme\n";
  for (const auto& r : rows)
    os << to_string(r.method) << ',' << detail::fmt_number(r.u) << ',' << detail::fmt_number(r.alpha) << ','
       << detail::fmt_number(r.prob) << ',' << to_string(r.scheme) << '\n';
  return os.str();
}

}  // namespace regionboot
