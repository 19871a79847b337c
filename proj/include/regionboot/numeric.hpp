#pragma once

// Numerical primitives shared by every module: normal and chi-square
// tails, composite Gauss-Legendre rules against the standard normal
// density, safeguarded monotone root finding, and deterministic
// parallel loops.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "regionboot/errors.hpp"

namespace regionboot {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// ---------------------------------------------------------------------------
// Normal distribution

inline double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

/// Upper tail 1 - Phi(x), accurate for large positive x.
inline double normal_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

/// Upper-tail quantile: returns z with normal_sf(z) == p.
inline double normal_isf(double p) {
  if (!(p > 0.0)) return std::numeric_limits<double>::infinity();
  if (!(p < 1.0)) return -std::numeric_limits<double>::infinity();
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

/// Lower quantile Phi^{-1}(p).
inline double normal_quantile(double p) { return -normal_isf(p); }

/// A probability carried together with its complement so that both tails
/// keep full relative precision.
struct TailPair {
  double p = 0.0;  // probability of the event
  double q = 1.0;  // probability of the complement

  /// z = Phibar^{-1}(p), computed from whichever tail is smaller.
  double z() const {
    if (p <= q) return normal_isf(std::max(p, 1e-300));
    return -normal_isf(std::max(q, 1e-300));
  }
};

// ---------------------------------------------------------------------------
// Chi-square

/// P(chi2_df >= x).
inline double chisq_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  if (df == 2.0) return std::exp(-0.5 * x);
  if (df == 1.0) return std::erfc(std::sqrt(0.5 * x));
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

// ---------------------------------------------------------------------------
// Quadrature against the standard normal density

/// A point around which the integrand is not smooth (scale == 0) or varies
/// on a short length scale (scale > 0), in standardized units. Panels are
/// graded geometrically from scale/16 up to the base panel width.
struct Feature {
  double at = 0.0;
  double scale = 0.0;
};

struct QuadratureOptions {
  double truncation = 8.5;   // integrate over [-truncation, truncation]
  double panel_width = 0.5;  // base panel width
  int order = 10;            // Gauss-Legendre points per panel (10 or 20)
  int max_refine = 60;       // cap on graded panels on each side of a Feature
};

/// Nodes and weights of a rule for  integral phi(t) f(t) dt ; the weights
/// already include the normal density.
struct NormalRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

namespace detail {

template <int N>
inline void gauss_legendre_nodes(std::vector<double>& x, std::vector<double>& w) {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& a = G::abscissa();
  const auto& b = G::weights();
  x.clear();
  w.clear();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      x.push_back(0.0);
      w.push_back(b[i]);
    } else {
      x.push_back(a[i]);
      w.push_back(b[i]);
      x.push_back(-a[i]);
      w.push_back(b[i]);
    }
  }
}

inline const std::pair<std::vector<double>, std::vector<double>>& legendre_table(int order) {
  static const auto t10 = [] {
    std::pair<std::vector<double>, std::vector<double>> r;
    gauss_legendre_nodes<10>(r.first, r.second);
    return r;
  }();
  static const auto t20 = [] {
    std::pair<std::vector<double>, std::vector<double>> r;
    gauss_legendre_nodes<20>(r.first, r.second);
    return r;
  }();
  static const auto t30 = [] {
    std::pair<std::vector<double>, std::vector<double>> r;
    gauss_legendre_nodes<30>(r.first, r.second);
    return r;
  }();
  if (order <= 10) return t10;
  if (order <= 20) return t20;
  return t30;
}

}  // namespace detail

/// Builds a composite Gauss-Legendre rule on [-L, L] with breakpoints at every
/// feature and geometrically graded panels around features with a scale.
inline NormalRule make_normal_rule(std::span<const Feature> features,
                                   const QuadratureOptions& opt = {}) {
  const double L = opt.truncation;
  std::vector<double> edges;
  const int nbase = std::max(1, static_cast<int>(std::ceil(2.0 * L / opt.panel_width)));
  for (int k = 0; k <= nbase; ++k) edges.push_back(-L + 2.0 * L * k / nbase);
  for (const auto& f : features) {
    if (!std::isfinite(f.at)) continue;
    edges.push_back(f.at);
    if (f.scale > 0.0) {
      double s = f.scale / 16.0;
      for (int k = 0; k < opt.max_refine && s < opt.panel_width; ++k, s *= 2.0) {
        edges.push_back(f.at - s);
        edges.push_back(f.at + s);
      }
    }
  }
  std::erase_if(edges, [L](double e) { return e < -L || e > L; });
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double a, double b) { return b - a < 1e-12; }),
              edges.end());

  const auto& [x, w] = detail::legendre_table(opt.order);
  NormalRule rule;
  rule.nodes.reserve(edges.size() * x.size());
  rule.weights.reserve(edges.size() * x.size());
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double a = edges[e], b = edges[e + 1];
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double t = mid + half * x[i];
      rule.nodes.push_back(t);
      rule.weights.push_back(half * w[i] * normal_pdf(t));
    }
  }
  return rule;
}

// ---------------------------------------------------------------------------
// Root finding

struct RootOptions {
  double xtol = 1e-12;
  int max_iter = 200;
};

/// Finds x with g(x) == 0 for a function g that is increasing near the root
/// and roughly linear with the given slope. Starts from `guess`, walks until
/// the root is bracketed, then refines with TOMS 748. Returns NaN when no
/// sign change is found within the iteration budget.
template <class G>
double solve_increasing(G&& g, double guess, double slope = 1.0, const RootOptions& opt = {}) {
  double x0 = guess;
  double f0 = g(x0);
  if (f0 == 0.0) return x0;
  if (!std::isfinite(f0)) return std::numeric_limits<double>::quiet_NaN();
  // Secant walk towards the root until the sign changes.
  double step = -f0 / slope;
  if (!std::isfinite(step)) step = f0 > 0 ? -1.0 : 1.0;
  if (std::abs(step) < 1e-6) step = f0 > 0 ? -1e-6 : 1e-6;
  double x1 = x0 + step, f1 = g(x1);
  int it = 0;
  while (std::isfinite(f1) && (f0 > 0) == (f1 > 0) && f1 != 0.0) {
    if (++it > 60) return std::numeric_limits<double>::quiet_NaN();
    double next;
    const double denom = f1 - f0;
    if (denom != 0.0 && (f1 - f0) / (x1 - x0) > 0.0) {
      next = x1 - f1 * (x1 - x0) / denom;
      // Keep going in the same direction and never shrink too much.
      const double dir = x1 - x0;
      const double minstep = 0.5 * std::abs(dir);
      if ((next - x1) * dir <= 0.0 || std::abs(next - x1) < minstep) next = x1 + (dir > 0 ? minstep : -minstep);
      if (std::abs(next - x1) > 8.0 * std::abs(dir)) next = x1 + 8.0 * dir;
    } else {
      next = x1 + 2.0 * (x1 - x0);
    }
    x0 = x1;
    f0 = f1;
    x1 = next;
    f1 = g(x1);
  }
  if (!std::isfinite(f1)) return std::numeric_limits<double>::quiet_NaN();
  if (f1 == 0.0) return x1;
  double a = std::min(x0, x1), b = std::max(x0, x1);
  double fa = x0 < x1 ? f0 : f1, fb = x0 < x1 ? f1 : f0;
  std::uintmax_t iters = static_cast<std::uintmax_t>(opt.max_iter);
  const double tol = opt.xtol;
  auto term = [tol](double lo, double hi) { return std::abs(hi - lo) <= tol; };
  auto r = boost::math::tools::toms748_solve(g, a, b, fa, fb, term, iters);
  return 0.5 * (r.first + r.second);
}

/// Secant iteration from a close guess for an increasing function with
/// approximate slope `slope`; falls back to solve_increasing when the
/// iteration leaves the region of fast convergence.
template <class G>
double solve_secant(G&& g, double guess, double slope = 1.0, const RootOptions& opt = {}) {
  double x0 = guess, f0 = g(x0);
  if (f0 == 0.0) return x0;
  if (!std::isfinite(f0)) return solve_increasing(g, guess, slope, opt);
  const double stop = std::max(opt.xtol, 1e-9);
  if (std::abs(f0 / slope) < 1e-3 * stop) return x0;
  double x1 = x0 - f0 / slope, f1 = g(x1);
  for (int it = 0; it < 12; ++it) {
    if (!std::isfinite(f1)) break;
    if (f1 == 0.0) return x1;
    const double d = (f1 - f0) / (x1 - x0);
    if (!(d > 0.0)) break;
    const double x2 = x1 - f1 / d;
    if (std::abs(x2 - x1) < stop) return x2;
    if (std::abs(f1) > std::abs(f0)) break;
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = g(x1);
  }
  return solve_increasing(g, guess, slope, opt);
}

// ---------------------------------------------------------------------------
// Parallel loops

namespace detail {
inline thread_local bool in_parallel_region = false;
}

/// Number of worker threads: REGIONBOOT_THREADS caps parallelism, 0 or unset
/// means hardware concurrency.
inline unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("REGIONBOOT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(std::min<long>(v, 1024));
  }
  return hw;
}

/// Runs body(i) for i in [0, n). Results must be written by index so the
/// outcome does not depend on scheduling. Nested calls run serially.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
  if (workers <= 1 || detail::in_parallel_region) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    detail::in_parallel_region = true;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) break;
      try {
        body(i);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
    detail::in_parallel_region = false;
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace regionboot
