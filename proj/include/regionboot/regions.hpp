#pragma once

// Null regions H = { (u, v) : v <= -h(u) } (and the ball), membership,
// boundary jets and the restricted MLE: the nearest boundary point to an
// observation together with the signed distance.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "regionboot/errors.hpp"
#include "regionboot/numeric.hpp"
#include "regionboot/surface_jets.hpp"

namespace regionboot {

using Point = std::vector<double>;  // (u_1, ..., u_q, v)

struct ProjectionResult {
  Point mu_hat;
  double lambda_hat = 0.0;
  std::vector<double> u_hat;
  bool converged = true;
  int iterations = 0;
};

/// Closed interval of v on a u-slice; empty when hi < lo.
struct VInterval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = 0.0;
  bool empty() const { return !(hi >= lo); }
};

/// Natural cubic spline through (x_k, y_k), linear beyond the end knots.
class NaturalSpline {
 public:
  NaturalSpline() = default;
  NaturalSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw InvalidArgument("NaturalSpline", "need at least two (u, h) pairs");
    for (std::size_t k = 1; k < n; ++k)
      if (!(x_[k] > x_[k - 1])) throw InvalidArgument("NaturalSpline", "table abscissae must be strictly increasing");
    m_.assign(n, 0.0);
    if (n > 2) {
      // Thomas algorithm for the interior second derivatives.
      std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
      for (std::size_t k = 1; k + 1 < n; ++k) {
        const double h0 = x_[k] - x_[k - 1], h1 = x_[k + 1] - x_[k];
        a[k] = h0 / 6.0;
        b[k] = (h0 + h1) / 3.0;
        c[k] = h1 / 6.0;
        d[k] = (y_[k + 1] - y_[k]) / h1 - (y_[k] - y_[k - 1]) / h0;
      }
      for (std::size_t k = 2; k + 1 < n; ++k) {
        const double w = a[k] / b[k - 1];
        b[k] -= w * c[k - 1];
        d[k] -= w * d[k - 1];
      }
      m_[n - 2] = d[n - 2] / b[n - 2];
      for (std::size_t k = n - 2; k-- > 1;) m_[k] = (d[k] - c[k] * m_[k + 1]) / b[k];
    }
  }

  /// Value and the first three derivatives at x.
  std::array<double, 4> eval(double x) const {
    const std::size_t n = x_.size();
    if (x <= x_.front() || x >= x_.back()) {
      const bool left = x <= x_.front();
      const std::size_t k = left ? 0 : n - 2;
      const double h = x_[k + 1] - x_[k];
      const double slope = left ? (y_[1] - y_[0]) / h - h * (2.0 * m_[0] + m_[1]) / 6.0
                                : (y_[n - 1] - y_[n - 2]) / h + h * (m_[n - 2] + 2.0 * m_[n - 1]) / 6.0;
      const double x0 = left ? x_.front() : x_.back();
      const double y0 = left ? y_.front() : y_.back();
      return {y0 + slope * (x - x0), slope, 0.0, 0.0};
    }
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[k + 1] - x_[k];
    const double a = (x_[k + 1] - x) / h, b = (x - x_[k]) / h;
    const double val = a * y_[k] + b * y_[k + 1] + ((a * a * a - a) * m_[k] + (b * b * b - b) * m_[k + 1]) * h * h / 6.0;
    const double d1 = (y_[k + 1] - y_[k]) / h - (3.0 * a * a - 1.0) / 6.0 * h * m_[k] + (3.0 * b * b - 1.0) / 6.0 * h * m_[k + 1];
    const double d2 = a * m_[k] + b * m_[k + 1];
    const double d3 = (m_[k + 1] - m_[k]) / h;
    return {val, d1, d2, d3};
  }

  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }

 private:
  std::vector<double> x_, y_, m_;
};

enum class RegionKind { efron, cone, sphere, table, jet };

class Region {
 public:
  struct Efron { double h0; };
  struct Cone { double slope; };
  struct Sphere { double radius; };
  struct Table { NaturalSpline spline; };
  struct Jet { SurfaceJet jet; };

  static Region efron(double h0, int q = 1) {
    if (!(h0 >= 0.0)) throw InvalidArgument("Region", "efron h0 must be >= 0");
    return Region(q, Efron{h0});
  }
  static Region cone(double slope = 1.0 / std::numbers::sqrt3, int q = 1) {
    if (!(slope >= 0.0)) throw InvalidArgument("Region", "cone slope must be >= 0");
    return Region(q, Cone{slope});
  }
  static Region flat(int q = 1) { return cone(0.0, q); }
  static Region sphere(double radius, int q = 1) {
    if (!(radius > 0.0)) throw InvalidArgument("Region", "sphere radius must be > 0");
    return Region(q, Sphere{radius});
  }
  static Region table(std::vector<double> u, std::vector<double> h) {
    return Region(1, Table{NaturalSpline(std::move(u), std::move(h))});
  }
  static Region polynomial(SurfaceJet jet) {
    const int q = jet.q();
    return Region(q, Jet{std::move(jet)});
  }

  int q() const { return q_; }

  RegionKind kind() const {
    return std::visit(
        [](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Efron>) return RegionKind::efron;
          else if constexpr (std::is_same_v<T, Cone>) return RegionKind::cone;
          else if constexpr (std::is_same_v<T, Sphere>) return RegionKind::sphere;
          else if constexpr (std::is_same_v<T, Table>) return RegionKind::table;
          else return RegionKind::jet;
        },
        data_);
  }

  const auto& data() const { return data_; }

  /// Boundary function; +inf where no boundary point exists above u.
  double h(std::span<const double> u) const {
    const double r2 = norm2(u);
    return std::visit(
        [&](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Efron>) return std::sqrt(d.h0 * d.h0 + r2 / 3.0);
          else if constexpr (std::is_same_v<T, Cone>) return d.slope * std::sqrt(r2);
          else if constexpr (std::is_same_v<T, Sphere>) {
            if (r2 > d.radius * d.radius) return std::numeric_limits<double>::infinity();
            return d.radius - std::sqrt(d.radius * d.radius - r2);
          } else if constexpr (std::is_same_v<T, Table>) return d.spline.eval(u[0])[0];
          else return d.jet.value(u);
        },
        data_);
  }

  double h(double u) const { return h(std::span<const double>(&u, 1)); }

  /// Range of v inside H above the tangent point u.
  VInterval v_interval(std::span<const double> u) const {
    if (const auto* s = std::get_if<Sphere>(&data_)) {
      const double d = s->radius * s->radius - norm2(u);
      if (d < 0.0) return {0.0, -1.0};
      const double w = std::sqrt(d);
      return {-s->radius - w, -s->radius + w};
    }
    return {-std::numeric_limits<double>::infinity(), -h(u)};
  }

  VInterval v_interval(double u) const { return v_interval(std::span<const double>(&u, 1)); }

  bool contains(std::span<const double> point) const {
    check_point(point, "contains");
    const auto iv = v_interval(point.first(q_));
    const double v = point[q_];
    return !iv.empty() && v <= iv.hi && v >= iv.lo;
  }

  /// Centre of the ball for sphere regions; on every u-slice the bootstrap
  /// probability is symmetric about this v.
  std::optional<double> slice_symmetry_v() const {
    if (const auto* s = std::get_if<Sphere>(&data_)) return -s->radius;
    return std::nullopt;
  }

  /// Points in u (q == 1) where the boundary is not smooth or bends sharply.
  std::vector<Feature> u_features() const {
    return std::visit(
        [&](const auto& d) -> std::vector<Feature> {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Efron>) {
            if (d.h0 == 0.0) return {{0.0, 0.0}};
            return {{0.0, d.h0 * std::numbers::sqrt3}};
          } else if constexpr (std::is_same_v<T, Cone>) {
            if (d.slope == 0.0) return {};
            return {{0.0, 0.0}};
          } else if constexpr (std::is_same_v<T, Sphere>) {
            return {{-d.radius, 1e-9 * d.radius}, {d.radius, 1e-9 * d.radius}};
          } else if constexpr (std::is_same_v<T, Table>) {
            std::vector<Feature> f;
            for (double x : d.spline.knots()) f.push_back({x, 0.0});
            return f;
          } else {
            return {};
          }
        },
        data_);
  }

  /// The region c H: boundary u -> c h(u / c).
  Region scaled(double c) const {
    if (!(c > 0.0)) throw InvalidScale("Region::scaled", "scale factor must be > 0");
    return std::visit(
        [&](const auto& d) -> Region {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Efron>) return efron(c * d.h0, q_);
          else if constexpr (std::is_same_v<T, Cone>) return cone(d.slope, q_);
          else if constexpr (std::is_same_v<T, Sphere>) return sphere(c * d.radius, q_);
          else if constexpr (std::is_same_v<T, Table>) {
            auto x = d.spline.knots();
            auto y = d.spline.values();
            for (auto& v : x) v *= c;
            for (auto& v : y) v *= c;
            return table(std::move(x), std::move(y));
          } else {
            SurfaceJet j = d.jet;
            double f = c;
            for (int k = 0; k <= SurfaceJet::kMaxOrder; ++k, f /= c)
              for (auto& v : j.tensor(k)) v *= f;
            return polynomial(std::move(j));
          }
        },
        data_);
  }

  // -------------------------------------------------------------------------
  // Jets

  /// Taylor coefficients of h about u (h0 = h(u), h1 = grad h(u), ...).
  SurfaceJet jet_at(std::span<const double> u) const {
    if (static_cast<int>(u.size()) != q_) throw InvalidArgument("jet_at", "tangent point has wrong dimension");
    const double r2 = norm2(u);
    return std::visit(
        [&](const auto& d) -> SurfaceJet {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Efron>) {
            if (d.h0 == 0.0 && r2 == 0.0) throw NonSmoothPoint("jet_at", "boundary has a kink at u = 0");
            return radial_sqrt_jet(u, d.h0 * d.h0, 1.0 / 3.0, 1.0, 0.0);
          } else if constexpr (std::is_same_v<T, Cone>) {
            if (d.slope == 0.0) return SurfaceJet(q_);
            if (r2 < 1e-24) throw NonSmoothPoint("jet_at", "boundary has a kink at the cone vertex");
            return radial_sqrt_jet(u, 0.0, 1.0, d.slope, 0.0);
          } else if constexpr (std::is_same_v<T, Sphere>) {
            const double rr = d.radius * d.radius;
            if (r2 >= rr) throw NonSmoothPoint("jet_at", "no smooth boundary above this point");
            return radial_sqrt_jet(u, rr, -1.0, -1.0, d.radius);
          } else if constexpr (std::is_same_v<T, Table>) {
            const auto& kn = d.spline.knots();
            SurfaceJet j(1);
            const auto e = d.spline.eval(u[0]);
            j.h0() = e[0];
            j.h1(0) = e[1];
            j.h2(0, 0) = e[2] / 2.0;
            double d3 = e[3];
            for (double x : kn)
              if (std::abs(u[0] - x) < 1e-12) {
                const auto lo = d.spline.eval(x - 1e-9), hi = d.spline.eval(x + 1e-9);
                d3 = 0.5 * (lo[3] + hi[3]);
              }
            j.h3(0, 0, 0) = d3 / 6.0;
            return j;
          } else {
            return reexpand(d.jet, u);
          }
        },
        data_);
  }

  SurfaceJet jet_at(double u) const { return jet_at(std::span<const double>(&u, 1)); }

  // -------------------------------------------------------------------------
  // Projection

  ProjectionResult project(std::span<const double> y) const {
    check_point(y, "project");
    for (double c : y)
      if (!std::isfinite(c)) throw InvalidArgument("project", "observation must be finite");
    ProjectionResult r;
    if (const auto* s = std::get_if<Sphere>(&data_)) {
      Point c(q_ + 1, 0.0);
      c[q_] = -s->radius;
      Point d(y.begin(), y.end());
      for (int i = 0; i <= q_; ++i) d[i] -= c[i];
      double rho = std::sqrt(norm2(d));
      if (rho == 0.0) {
        d.assign(q_ + 1, 0.0);
        d[q_] = 1.0;
        rho = 0.0;
      }
      const double len = rho == 0.0 ? 1.0 : rho;
      r.mu_hat.resize(q_ + 1);
      for (int i = 0; i <= q_; ++i) r.mu_hat[i] = c[i] + s->radius * d[i] / len;
      r.lambda_hat = rho - s->radius;
      r.u_hat.assign(r.mu_hat.begin(), r.mu_hat.begin() + q_);
      return r;
    }
    const bool radial = std::holds_alternative<Efron>(data_) || std::holds_alternative<Cone>(data_);
    if (q_ == 1 || radial) {
      // Reduce radial problems to the (|u|, v) half-plane.
      const double yu = q_ == 1 ? y[0] : std::sqrt(norm2(y.first(q_)));
      const double yv = y[q_];
      const auto [uf, iters] = project_1d(yu, yv);
      r.iterations = iters;
      r.u_hat.assign(q_, 0.0);
      if (q_ == 1) {
        r.u_hat[0] = uf;
      } else if (yu > 0.0) {
        for (int i = 0; i < q_; ++i) r.u_hat[i] = uf * y[i] / yu;
      } else {
        r.u_hat[0] = uf;
      }
    } else {
      r.u_hat = project_newton(y, r.iterations, r.converged);
    }
    r.mu_hat = r.u_hat;
    r.mu_hat.push_back(-h(r.u_hat));
    Point diff(y.begin(), y.end());
    for (int i = 0; i <= q_; ++i) diff[i] -= r.mu_hat[i];
    const double dist = std::sqrt(norm2(diff));
    r.lambda_hat = contains(y) ? -dist : dist;
    if (!r.converged) throw NonConvergence("project", "optimizer did not reach tolerance 1e-10");
    return r;
  }

  ProjectionResult project(double yu, double yv) const {
    const double y[2] = {yu, yv};
    return project(std::span<const double>(y, 2));
  }

  /// Boundary point (u, -h(u)).
  Point boundary_point(std::span<const double> u) const {
    Point p(u.begin(), u.end());
    p.push_back(-h(u));
    return p;
  }

  Point boundary_point(double u) const { return boundary_point(std::span<const double>(&u, 1)); }

  // -------------------------------------------------------------------------
  // JSON descriptors

  nlohmann::json to_json() const {
    nlohmann::json j = std::visit(
        [](const auto& d) -> nlohmann::json {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Efron>) return {{"kind", "efron"}, {"h0", d.h0}};
          else if constexpr (std::is_same_v<T, Cone>) return {{"kind", "cone"}, {"slope", d.slope}};
          else if constexpr (std::is_same_v<T, Sphere>) return {{"kind", "sphere"}, {"radius", d.radius}};
          else if constexpr (std::is_same_v<T, Table>) {
            nlohmann::json t = nlohmann::json::array();
            for (std::size_t k = 0; k < d.spline.knots().size(); ++k)
              t.push_back({d.spline.knots()[k], d.spline.values()[k]});
            return {{"kind", "custom"}, {"table", t}};
          } else {
            return {{"kind", "custom"}, {"jet", jet_to_json(d.jet)}};
          }
        },
        data_);
    if (q_ != 1 && !std::holds_alternative<Jet>(data_)) j["q"] = q_;
    return j;
  }

  static Region from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind")) throw InvalidArgument("Region", "descriptor needs a \"kind\" field");
    const std::string kind = j.at("kind").get<std::string>();
    const int q = j.value("q", 1);
    if (kind == "efron") return efron(j.value("h0", 0.1), q);
    if (kind == "cone") return cone(j.value("slope", 1.0 / std::numbers::sqrt3), q);
    if (kind == "flat") return flat(q);
    if (kind == "sphere") return sphere(j.at("radius").get<double>(), q);
    if (kind == "custom") {
      if (j.contains("jet")) return polynomial(jet_from_json(j.at("jet")));
      if (j.contains("table")) {
        std::vector<double> x, y;
        for (const auto& row : j.at("table")) {
          if (!row.is_array() || row.size() != 2) throw InvalidArgument("Region", "table rows must be [u, h]");
          x.push_back(row[0].get<double>());
          y.push_back(row[1].get<double>());
        }
        return table(std::move(x), std::move(y));
      }
      throw InvalidArgument("Region", "custom region needs \"table\" or \"jet\"");
    }
    throw InvalidArgument("Region", "unknown region kind '" + kind + "'");
  }

  /// Accepts a JSON descriptor or one of the names cone, flat, efron, sphere.
  static Region parse(const std::string& text) {
    if (text == "cone") return cone();
    if (text == "flat") return flat();
    if (text == "efron") return efron(0.1);
    if (text == "sphere") return sphere(1.0);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument("Region", "cannot parse region '" + text + "': " + e.what());
    }
    return from_json(j);
  }

 private:
  using Data = std::variant<Efron, Cone, Sphere, Table, Jet>;

  Region(int q, Data d) : q_(q), data_(std::move(d)) {
    if (q < 1) throw UnsupportedDim("Region", "tangent dimension q must be >= 1");
  }

  static double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
  }

  void check_point(std::span<const double> p, const char* op) const {
    if (static_cast<int>(p.size()) != q_ + 1) throw InvalidArgument(op, "point must have q + 1 coordinates");
  }

  // Jet of c + sign * sqrt(a + b |u0 + d|^2) in d.
  SurfaceJet radial_sqrt_jet(std::span<const double> u0, double a, double b, double sign, double c) const {
    SurfaceJet e(q_);  // s - s0 as a polynomial in d
    const double s0 = a + b * norm2(u0);
    for (int i = 0; i < q_; ++i) {
      e.h1(i) = 2.0 * b * u0[i];
      e.h2(i, i) = b;
    }
    // sqrt(s0 + e) = sqrt(s0) sum_k binom(1/2, k) (e / s0)^k
    constexpr double binom[5] = {1.0, 0.5, -0.125, 0.0625, -0.0390625};
    const double rs = std::sqrt(s0);
    SurfaceJet out(q_), power(q_);
    power.h0() = 1.0;
    for (int k = 0; k <= 4; ++k) {
      const double f = sign * rs * binom[k] / std::pow(s0, k);
      for (int d = 0; d <= SurfaceJet::kMaxOrder; ++d)
        for (std::size_t m = 0; m < out.tensor(d).size(); ++m) out.tensor(d)[m] += f * power.tensor(d)[m];
      power = jet_product(power, e);
    }
    out.h0() += c;
    return out;
  }

  static SurfaceJet reexpand(const SurfaceJet& p, std::span<const double> u) {
    const int q = p.q();
    SurfaceJet j(q);
    j.h0() = p.value(u);
    const Eigen::VectorXd g = p.gradient(u);
    for (int i = 0; i < q; ++i) j.h1(i) = g[i];
    const Eigen::MatrixXd hh = p.half_hessian(u);
    for (int i = 0; i < q; ++i)
      for (int k = 0; k < q; ++k) j.h2(i, k) = hh(i, k);
    for (int i = 0; i < q; ++i)
      for (int k = 0; k < q; ++k)
        for (int l = 0; l < q; ++l) {
          double s = p.h3(i, k, l);
          for (int m = 0; m < q; ++m) s += 4.0 * p.h4(i, k, l, m) * u[m];
          j.h3(i, k, l) = s;
        }
    j.tensor(4) = p.tensor(4);
    return j;
  }

  // h, h', h'' of the one-dimensional profile (radial profile for q > 1).
  std::array<double, 3> profile(double u) const {
    return std::visit(
        [&](const auto& d) -> std::array<double, 3> {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Efron>) {
            const double hv = std::sqrt(d.h0 * d.h0 + u * u / 3.0);
            if (hv == 0.0) return {0.0, 0.0, 0.0};
            const double d1 = u / (3.0 * hv);
            return {hv, d1, (1.0 / 3.0 - d1 * d1) / hv};
          } else if constexpr (std::is_same_v<T, Cone>) {
            return {d.slope * std::abs(u), u > 0 ? d.slope : (u < 0 ? -d.slope : 0.0), 0.0};
          } else if constexpr (std::is_same_v<T, Table>) {
            const auto e = d.spline.eval(u);
            return {e[0], e[1], e[2]};
          } else if constexpr (std::is_same_v<T, Jet>) {
            const double x[1] = {u};
            return {d.jet.value(x), d.jet.gradient(x)[0], 2.0 * d.jet.half_hessian(x)(0, 0)};
          } else {
            return {0.0, 0.0, 0.0};
          }
        },
        data_);
  }

  // Nearest point on v = -p(u) to (yu, yv); returns the foot parameter.
  std::pair<double, int> project_1d(double yu, double yv) const {
    if (const auto* c = std::get_if<Cone>(&data_)) {
      const double s = c->slope;
      const double norm = 1.0 + s * s;
      // Foot on the branch through the side of yu (u >= 0 on ties).
      const double sgn = yu < 0.0 ? -1.0 : 1.0;
      const double t = (sgn * yu - s * yv) / norm;
      if (t <= 0.0) return {0.0, 0};
      return {sgn * t, 0};
    }
    auto dist2 = [&](double u) {
      const double dv = profile(u)[0] + yv;
      return (u - yu) * (u - yu) + dv * dv;
    };
    const double reach = std::abs(profile(yu)[0] + yv);
    if (reach == 0.0) return {yu, 0};
    const bool custom = std::holds_alternative<Table>(data_) || std::holds_alternative<Jet>(data_);
    const int n = custom ? 17 * 8 + 1 : 201;
    const double lo = yu - reach, hi = yu + reach, step = (hi - lo) / (n - 1);
    std::vector<double> f(n);
    for (int k = 0; k < n; ++k) f[k] = dist2(lo + k * step);
    double best_u = yu, best_d = std::numeric_limits<double>::infinity();
    int iters = 0;
    for (int k = 0; k < n; ++k) {
      const bool local = (k == 0 || f[k] <= f[k - 1]) && (k == n - 1 || f[k] <= f[k + 1]);
      if (!local) continue;
      const double a = lo + std::max(0, k - 1) * step, b = lo + std::min(n - 1, k + 1) * step;
      auto [uu, it] = refine_min(dist2, a, b, yu, yv);
      iters += it;
      const double dd = dist2(uu);
      if (dd < best_d - 1e-14 || (std::abs(dd - best_d) <= 1e-14 && uu >= 0.0 && best_u < 0.0)) {
        best_d = dd;
        best_u = uu;
      }
    }
    return {best_u, iters};
  }

  template <class F>
  std::pair<double, int> refine_min(F&& dist2, double a, double b, double yu, double yv) const {
    constexpr double invphi = 0.6180339887498949;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = dist2(c), fd = dist2(d);
    int it = 0;
    while (b - a > 1e-6 && it < 200) {
      ++it;
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - invphi * (b - a);
        fc = dist2(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + invphi * (b - a);
        fd = dist2(d);
      }
    }
    double u = 0.5 * (a + b);
    // Newton on the stationarity condition (u - yu) + (h + yv) h' = 0.
    for (int k = 0; k < 50; ++k) {
      ++it;
      const auto p = profile(u);
      const double g = (u - yu) + (p[0] + yv) * p[1];
      const double gp = 1.0 + p[1] * p[1] + (p[0] + yv) * p[2];
      if (!(gp > 0.0)) break;
      const double nu = u - g / gp;
      if (!std::isfinite(nu) || nu < a - 1e-3 || nu > b + 1e-3) break;
      const double delta = std::abs(nu - u);
      u = nu;
      if (delta < 1e-13) break;
    }
    return {u, it};
  }

  // Damped Newton with multi-start for polynomial boundaries in q >= 2.
  std::vector<double> project_newton(std::span<const double> y, int& iterations, bool& converged) const {
    const auto& jet = std::get<Jet>(data_).jet;
    const Eigen::Map<const Eigen::VectorXd> yu(y.data(), q_);
    const double yv = y[q_];
    auto obj = [&](const Eigen::VectorXd& u) {
      const double dv = jet.value(std::span<const double>(u.data(), q_)) + yv;
      return (u - yu).squaredNorm() + dv * dv;
    };
    const double reach = std::abs(jet.value(std::span<const double>(y.data(), q_)) + yv);
    std::vector<Eigen::VectorXd> starts{yu};
    for (int k = 0; k < 16; ++k) {
      Eigen::VectorXd s = yu;
      const int axis = k % q_;
      const double sign = (k / q_) % 2 == 0 ? 1.0 : -1.0;
      s[axis] += sign * reach * (0.25 + 0.75 * ((k / (2 * q_)) % 2));
      starts.push_back(s);
    }
    Eigen::VectorXd best;
    double best_f = std::numeric_limits<double>::infinity();
    bool best_ok = false;
    iterations = 0;
    for (const auto& s : starts) {
      Eigen::VectorXd u = s;
      bool ok = false;
      for (int it = 0; it < 100; ++it) {
        ++iterations;
        const std::span<const double> us(u.data(), q_);
        const double r = jet.value(us) + yv;
        const Eigen::VectorXd g = jet.gradient(us);
        const Eigen::VectorXd grad = 2.0 * (u - yu) + 2.0 * r * g;
        Eigen::MatrixXd hess = 2.0 * Eigen::MatrixXd::Identity(q_, q_) + 2.0 * g * g.transpose() +
                               4.0 * r * jet.half_hessian(us);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
        Eigen::VectorXd step = ldlt.info() == Eigen::Success && ldlt.isPositive() ? Eigen::VectorXd(-ldlt.solve(grad))
                                                                                : Eigen::VectorXd(-0.5 * grad);
        double t = 1.0;
        const double f0 = obj(u);
        while (t > 1e-12 && obj(u + t * step) > f0) t *= 0.5;
        u += t * step;
        if ((t * step).norm() < 1e-12 || grad.norm() < 1e-12) {
          ok = true;
          break;
        }
      }
      const double f = obj(u);
      if (f < best_f) {
        best_f = f;
        best = u;
        best_ok = ok;
      }
    }
    converged = best_ok;
    return std::vector<double>(best.data(), best.data() + q_);
  }

  int q_;
  Data data_;
};

}  // namespace regionboot
