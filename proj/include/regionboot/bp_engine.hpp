#pragma once

// Bootstrap probability BP_{sigma2}(H|y) and double bootstrap probability
// DBP_{tau2,sigma2}(H|y), by seeded Monte Carlo or by deterministic
// quadrature (q == 1).
//
// Quadrature: BP = E_U[ P(v in slice(y_u + sigma U)) ] with the v-probability
// in closed form, U integrated by a composite Gauss-Legendre rule against
// the normal density. DBP integrates over the outer u-coordinate, locating
// on each slice the contour v where BP equals BP(y) and using the exact
// normal tail beyond it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regionboot/errors.hpp"
#include "regionboot/numeric.hpp"
#include "regionboot/regions.hpp"
#include "regionboot/rng.hpp"

namespace regionboot {

enum class Backend { mc, quad };

inline std::string to_string(Backend b) { return b == Backend::mc ? "mc" : "quad"; }

inline Backend parse_backend(const std::string& s) {
  if (s == "mc") return Backend::mc;
  if (s == "quad") return Backend::quad;
  throw InvalidArgument("backend", "expected mc or quad, got '" + s + "'");
}

struct BootstrapEstimate {
  double value = 0.0;
  double complement = 1.0;
  double std_error = 0.0;
  std::uint64_t replicates = 0;
  Backend backend = Backend::quad;
  std::uint64_t seed = 0;
  double sigma2 = 1.0;

  TailPair tail() const { return {value, complement}; }
};

struct EngineOptions {
  QuadratureOptions inner{8.5, 2.0, 10};
  QuadratureOptions outer{8.5, 2.0, 10};
  double root_xtol = 1e-12;
};

inline constexpr std::uint64_t kChunkSize = 65536;

namespace detail {

inline void require_scale(double s2, const char* op) {
  if (!(s2 > 0.0) || !std::isfinite(s2)) throw InvalidScale(op, "variance scale must be a positive finite number");
}

inline void require_point(const Region& r, std::span<const double> y, const char* op) {
  if (static_cast<int>(y.size()) != r.q() + 1) throw InvalidArgument(op, "point must have q + 1 coordinates");
  for (double c : y)
    if (!std::isfinite(c)) throw InvalidArgument(op, "point must be finite");
}

// Probability that N(mean, s^2) lies in iv, with its complement.
inline TailPair slice_mass(const VInterval& iv, double mean, double s) {
  if (iv.empty()) return {0.0, 1.0};
  const double b = (iv.hi - mean) / s;
  if (std::isinf(iv.lo)) return {normal_sf(-b), normal_sf(b)};
  const double a = (iv.lo - mean) / s;
  double p;
  if (a > 0.0) p = normal_sf(a) - normal_sf(b);
  else if (b < 0.0) p = normal_cdf(b) - normal_cdf(a);
  else p = 1.0 - normal_sf(b) - normal_cdf(a);
  return {std::max(p, 0.0), normal_cdf(a) + normal_sf(b)};
}

inline NormalRule rule_for(const Region& r, double center_u, double s, const QuadratureOptions& opt) {
  std::vector<Feature> feats;
  for (const auto& f : r.u_features()) feats.push_back({(f.at - center_u) / s, f.scale / s});
  return make_normal_rule(feats, opt);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Quadrature backend

/// BP_{sigma2}(H|y) with its complement, q == 1.
inline TailPair bp_quad(const Region& region, std::span<const double> y, double sigma2,
                        const EngineOptions& opt = {}) {
  detail::require_scale(sigma2, "bp");
  detail::require_point(region, y, "bp");
  if (region.q() != 1) throw UnsupportedDim("bp", "quadrature backend requires q = 1");
  const double s = std::sqrt(sigma2);
  const NormalRule rule = detail::rule_for(region, y[0], s, opt.inner);
  TailPair acc{0.0, 0.0};
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double u = y[0] + s * rule.nodes[i];
    const TailPair m = detail::slice_mass(region.v_interval(u), y[1], s);
    acc.p += rule.weights[i] * m.p;
    acc.q += rule.weights[i] * m.q;
  }
  // The truncated tails carry no more than 1e-16 of mass; renormalize.
  const double total = acc.p + acc.q;
  acc.p /= total;
  acc.q /= total;
  return acc;
}

inline TailPair bp_quad(const Region& region, double yu, double yv, double sigma2, const EngineOptions& opt = {}) {
  const double y[2] = {yu, yv};
  return bp_quad(region, std::span<const double>(y, 2), sigma2, opt);
}

/// Checks that a supplied center lies on the boundary within 1e-9.
inline void require_on_boundary(const Region& region, std::span<const double> c, const char* op) {
  detail::require_point(region, c, op);
  const auto iv = region.v_interval(c.first(region.q()));
  const double v = c[region.q()];
  const bool on = !iv.empty() && (std::abs(v - iv.hi) <= 1e-9 || std::abs(v - iv.lo) <= 1e-9);
  if (!on) throw CenterOffBoundary(op, "center is not on the region boundary within 1e-9");
}

/// DBP_{tau2,sigma2}(H|y) = P( BP_{sigma2}(Y+) <= BP_{sigma2}(y) ), Y+ ~ N(center, tau2 I),
/// with the center at the projection of y unless given. q == 1.
inline TailPair dbp_quad(const Region& region, std::span<const double> y, double tau2, double sigma2,
                         const std::optional<Point>& center = std::nullopt, const EngineOptions& opt = {}) {
  detail::require_scale(tau2, "dbp");
  detail::require_scale(sigma2, "dbp");
  detail::require_point(region, y, "dbp");
  if (region.q() != 1) throw UnsupportedDim("dbp", "quadrature backend requires q = 1");
  Point c;
  if (center) {
    require_on_boundary(region, *center, "dbp");
    c = *center;
  } else {
    c = region.project(y).mu_hat;
  }
  const double tau = std::sqrt(tau2), s = std::sqrt(sigma2);
  const double z0 = bp_quad(region, y, sigma2, opt).z();
  const auto mode = region.slice_symmetry_v();

  // Outer rule: the contour bends on the length scale s around boundary kinks.
  std::vector<Feature> feats;
  for (const auto& f : region.u_features()) feats.push_back({(f.at - c[0]) / tau, std::max(f.scale, s) / tau});
  const NormalRule rule = make_normal_rule(feats, opt.outer);
  const std::size_t n = rule.size();

  auto contour = [&](double u, double guess) {
    auto g = [&](double v) {
      if (mode) v = *mode + std::abs(v - *mode);
      return bp_quad(region, u, v, sigma2, opt).z() - z0;
    };
    if (mode && g(*mode) >= 0.0) return *mode;  // whole slice has BP <= b0
    RootOptions ro;
    ro.xtol = opt.root_xtol;
    double v = solve_secant(g, guess, 1.0 / s, ro);
    if (!std::isfinite(v)) throw NonConvergence("dbp", "contour of the bootstrap probability not bracketed");
    if (mode) v = *mode + std::abs(v - *mode);
    return v;
  };

  // Sweep outward from the slice through y, where the contour passes y itself.
  std::vector<double> roots(n);
  std::size_t start = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::abs(c[0] + tau * rule.nodes[i] - y[0]);
    if (d < best) {
      best = d;
      start = i;
    }
  }
  // Guesses extrapolate linearly from the two previous slices.
  auto predict = [&](std::size_t i, std::size_t prev, std::size_t prev2, bool two) {
    if (!two) return roots[prev];
    const double x = rule.nodes[i], x1 = rule.nodes[prev], x2 = rule.nodes[prev2];
    return roots[prev] + (roots[prev] - roots[prev2]) * (x - x1) / (x1 - x2);
  };
  roots[start] = contour(c[0] + tau * rule.nodes[start], y[1]);
  for (std::size_t i = start + 1; i < n; ++i)
    roots[i] = contour(c[0] + tau * rule.nodes[i], predict(i, i - 1, i - 2, i >= start + 2));
  for (std::size_t i = start; i-- > 0;)
    roots[i] = contour(c[0] + tau * rule.nodes[i], predict(i, i + 1, i + 2, i + 2 <= start));

  TailPair acc{0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double w = rule.weights[i];
    const double a = (roots[i] - c[1]) / tau;
    if (mode) {
      const double b = (2.0 * *mode - roots[i] - c[1]) / tau;  // mirrored root below the mode
      const double inside = std::max(0.0, normal_cdf(a) - normal_cdf(b));
      acc.p += w * (normal_sf(a) + normal_cdf(b));
      acc.q += w * inside;
    } else {
      acc.p += w * normal_sf(a);
      acc.q += w * normal_cdf(a);
    }
  }
  const double total = acc.p + acc.q;
  acc.p /= total;
  acc.q /= total;
  return acc;
}

// ---------------------------------------------------------------------------
// Monte Carlo backend

/// Number of Y* ~ N(y, sigma2 I) in H out of B, drawn from stream `stream`.
inline std::uint64_t bp_mc_count(const Region& region, std::span<const double> y, double sigma2, std::uint64_t B,
                                 std::uint64_t seed, std::uint32_t stream = 0) {
  detail::require_scale(sigma2, "bp");
  detail::require_point(region, y, "bp");
  if (B == 0) throw InvalidArgument("bp", "replicate count must be positive");
  const double s = std::sqrt(sigma2);
  const std::size_t dim = y.size();
  const std::size_t chunks = static_cast<std::size_t>((B + kChunkSize - 1) / kChunkSize);
  std::vector<std::uint64_t> counts(chunks, 0);
  parallel_for(chunks, [&](std::size_t c) {
    NormalStream gen(seed, stream, static_cast<std::uint32_t>(c));
    const std::uint64_t begin = c * kChunkSize;
    const std::uint64_t end = std::min<std::uint64_t>(B, begin + kChunkSize);
    Point p(dim);
    std::uint64_t hit = 0;
    for (std::uint64_t b = begin; b < end; ++b) {
      for (std::size_t k = 0; k < dim; ++k) p[k] = y[k] + s * gen.next();
      hit += region.contains(p) ? 1 : 0;
    }
    counts[c] = hit;
  });
  std::uint64_t total = 0;
  for (auto v : counts) total += v;
  return total;
}

struct BpRequest {
  Backend backend = Backend::quad;
  std::uint64_t replicates = 10000;
  std::uint64_t seed = 0;
  std::uint32_t stream = 0;
  EngineOptions quad{};
};

inline BootstrapEstimate bp(const Region& region, std::span<const double> y, double sigma2, const BpRequest& req = {}) {
  BootstrapEstimate e;
  e.backend = req.backend;
  e.sigma2 = sigma2;
  if (req.backend == Backend::quad) {
    const TailPair t = bp_quad(region, y, sigma2, req.quad);
    e.value = t.p;
    e.complement = t.q;
    return e;
  }
  const std::uint64_t k = bp_mc_count(region, y, sigma2, req.replicates, req.seed, req.stream);
  e.replicates = req.replicates;
  e.seed = req.seed;
  e.value = static_cast<double>(k) / static_cast<double>(req.replicates);
  e.complement = static_cast<double>(req.replicates - k) / static_cast<double>(req.replicates);
  e.std_error = std::sqrt(e.value * e.complement / static_cast<double>(req.replicates));
  return e;
}

struct DbpRequest {
  Backend backend = Backend::quad;
  std::uint64_t outer_replicates = 10000;
  std::uint64_t inner_replicates = 10000;
  std::uint64_t seed = 0;
  std::uint32_t stream = 0;
  bool inner_quad = true;  // exact inner BP when q == 1
  std::optional<Point> center;
  EngineOptions quad{};
};

inline BootstrapEstimate dbp(const Region& region, std::span<const double> y, double tau2, double sigma2,
                             const DbpRequest& req = {}) {
  BootstrapEstimate e;
  e.backend = req.backend;
  e.sigma2 = sigma2;
  if (req.backend == Backend::quad) {
    const TailPair t = dbp_quad(region, y, tau2, sigma2, req.center, req.quad);
    e.value = t.p;
    e.complement = t.q;
    return e;
  }
  detail::require_scale(tau2, "dbp");
  detail::require_scale(sigma2, "dbp");
  detail::require_point(region, y, "dbp");
  if (req.outer_replicates == 0 || req.inner_replicates == 0)
    throw InvalidArgument("dbp", "replicate counts must be positive");
  Point c;
  if (req.center) {
    require_on_boundary(region, *req.center, "dbp");
    c = *req.center;
  } else {
    c = region.project(y).mu_hat;
  }
  const bool exact_inner = req.inner_quad && region.q() == 1;
  // Inner streams: tag bit 31 marks nested draws, each outer draw keyed separately.
  const std::uint32_t inner_stream = req.stream | 0x80000000u;
  auto inner_bp = [&](std::span<const double> p, std::uint64_t key) -> double {
    if (exact_inner) return bp_quad(region, p, sigma2, req.quad).p;
    const std::uint64_t k = bp_mc_count(region, p, sigma2, req.inner_replicates, key, inner_stream);
    return static_cast<double>(k) / static_cast<double>(req.inner_replicates);
  };
  const double b0 = inner_bp(y, splitmix64(req.seed));
  const double tau = std::sqrt(tau2);
  const std::size_t dim = y.size();
  const std::uint64_t B = req.outer_replicates;
  const std::size_t chunks = static_cast<std::size_t>((B + kChunkSize - 1) / kChunkSize);
  std::vector<std::uint64_t> counts(chunks, 0);
  parallel_for(chunks, [&](std::size_t ch) {
    NormalStream gen(req.seed, req.stream, static_cast<std::uint32_t>(ch));
    const std::uint64_t begin = ch * kChunkSize;
    const std::uint64_t end = std::min<std::uint64_t>(B, begin + kChunkSize);
    Point p(dim);
    std::uint64_t hit = 0;
    for (std::uint64_t b = begin; b < end; ++b) {
      for (std::size_t k = 0; k < dim; ++k) p[k] = c[k] + tau * gen.next();
      hit += inner_bp(p, splitmix64(req.seed ^ splitmix64(b + 1))) <= b0 ? 1 : 0;
    }
    counts[ch] = hit;
  });
  std::uint64_t k = 0;
  for (auto v : counts) k += v;
  e.replicates = B;
  e.seed = req.seed;
  e.value = static_cast<double>(k) / static_cast<double>(B);
  e.complement = static_cast<double>(B - k) / static_cast<double>(B);
  e.std_error = std::sqrt(e.value * e.complement / static_cast<double>(B));
  return e;
}

}  // namespace regionboot
