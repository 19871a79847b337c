#pragma once

// Coefficient-level calculus of boundary surfaces v = -h(u).
//
// A SurfaceJet stores the Taylor coefficients of h up to fourth order,
//
//   h(u) = h0 + h_i u_i + h_ij u_i u_j + h_ijk u_i u_j u_k + h_ijkl u_i u_j u_k u_l,
//
// with fully symmetric tensors (so h_ij is half the second derivative, h_ijk
// a sixth of the third, h_ijkl a 24th of the fourth). The operations below
// implement the truncated coefficient algebra for curvature summaries,
// moving to local coordinates, shifting along the normal and taking contour
// surfaces of the bootstrap probability. They are asymptotic identities:
// exact recomputations agree with them only up to the neglected order.

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "regionboot/errors.hpp"

namespace regionboot {

class SurfaceJet {
 public:
  static constexpr int kMaxOrder = 4;

  explicit SurfaceJet(int q = 1) : q_(q) {
    if (q < 1) throw InvalidArgument("SurfaceJet", "tangent dimension q must be >= 1");
    std::size_t n = 1;
    for (int d = 0; d <= kMaxOrder; ++d) {
      coef_[d].assign(n, 0.0);
      n *= static_cast<std::size_t>(q);
    }
  }

  int q() const { return q_; }

  double& h0() { return coef_[0][0]; }
  double h0() const { return coef_[0][0]; }
  double& h1(int i) { return coef_[1][i]; }
  double h1(int i) const { return coef_[1][i]; }
  double& h2(int i, int j) { return coef_[2][i * q_ + j]; }
  double h2(int i, int j) const { return coef_[2][i * q_ + j]; }
  double& h3(int i, int j, int k) { return coef_[3][(i * q_ + j) * q_ + k]; }
  double h3(int i, int j, int k) const { return coef_[3][(i * q_ + j) * q_ + k]; }
  double& h4(int i, int j, int k, int l) { return coef_[4][((i * q_ + j) * q_ + k) * q_ + l]; }
  double h4(int i, int j, int k, int l) const { return coef_[4][((i * q_ + j) * q_ + k) * q_ + l]; }

  /// Flat row-major storage of the degree-d tensor (q^d entries).
  std::vector<double>& tensor(int d) { return coef_[d]; }
  const std::vector<double>& tensor(int d) const { return coef_[d]; }

  /// Replaces every tensor by its average over index permutations.
  void symmetrize() {
    for (int d = 2; d <= kMaxOrder; ++d) coef_[d] = symmetrized(coef_[d], d);
  }

  double max_asymmetry() const {
    double worst = 0.0;
    for (int d = 2; d <= kMaxOrder; ++d) {
      const auto sym = symmetrized(coef_[d], d);
      for (std::size_t k = 0; k < sym.size(); ++k) worst = std::max(worst, std::abs(sym[k] - coef_[d][k]));
    }
    return worst;
  }

  /// Polynomial value at u.
  double value(std::span<const double> u) const {
    double s = h0();
    for (int d = 1; d <= kMaxOrder; ++d) s += contract_all(d, u);
    return s;
  }

  /// Gradient of the polynomial at u.
  Eigen::VectorXd gradient(std::span<const double> u) const {
    Eigen::VectorXd g(q_);
    for (int i = 0; i < q_; ++i) {
      double s = h1(i);
      for (int j = 0; j < q_; ++j) {
        s += 2.0 * h2(i, j) * u[j];
        for (int k = 0; k < q_; ++k) {
          s += 3.0 * h3(i, j, k) * u[j] * u[k];
          for (int l = 0; l < q_; ++l) s += 4.0 * h4(i, j, k, l) * u[j] * u[k] * u[l];
        }
      }
      g[i] = s;
    }
    return g;
  }

  /// Half the Hessian of the polynomial at u: h_ij + 3 h_ijk u_k + 6 h_ijkl u_k u_l.
  Eigen::MatrixXd half_hessian(std::span<const double> u) const {
    Eigen::MatrixXd m(q_, q_);
    for (int i = 0; i < q_; ++i)
      for (int j = 0; j < q_; ++j) {
        double s = h2(i, j);
        for (int k = 0; k < q_; ++k) {
          s += 3.0 * h3(i, j, k) * u[k];
          for (int l = 0; l < q_; ++l) s += 6.0 * h4(i, j, k, l) * u[k] * u[l];
        }
        m(i, j) = s;
      }
    return m;
  }

  Eigen::MatrixXd second_order() const {
    Eigen::MatrixXd d(q_, q_);
    for (int i = 0; i < q_; ++i)
      for (int j = 0; j < q_; ++j) d(i, j) = h2(i, j);
    return d;
  }

  friend bool operator==(const SurfaceJet&, const SurfaceJet&) = default;

 private:
  double contract_all(int d, std::span<const double> u) const {
    double s = 0.0;
    const std::size_t n = coef_[d].size();
    for (std::size_t flat = 0; flat < n; ++flat) {
      double term = coef_[d][flat];
      std::size_t rest = flat;
      for (int a = 0; a < d; ++a) {
        term *= u[rest % q_];
        rest /= q_;
      }
      s += term;
    }
    return s;
  }

  std::vector<double> symmetrized(const std::vector<double>& t, int d) const {
    std::vector<double> out(t.size(), 0.0);
    std::vector<int> idx(d), perm(d);
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
      std::size_t rest = flat;
      for (int a = d - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(rest % q_);
        rest /= q_;
      }
      std::iota(perm.begin(), perm.end(), 0);
      double sum = 0.0;
      int count = 0;
      do {
        std::size_t p = 0;
        for (int a = 0; a < d; ++a) p = p * q_ + idx[perm[a]];
        sum += t[p];
        ++count;
      } while (std::next_permutation(perm.begin(), perm.end()));
      out[flat] = sum / count;
    }
    return out;
  }

  int q_;
  std::array<std::vector<double>, kMaxOrder + 1> coef_;
};

/// gamma_1..gamma_4 of a surface at a point.
struct Curvatures {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma3 = 0.0;
  double gamma4 = 0.0;
};

struct GeometricSummary {
  double gamma1 = 0.0, gamma2 = 0.0, gamma3 = 0.0, gamma4 = 0.0;
  double beta0 = 0.0, beta1 = 0.0, beta2 = 0.0, beta3 = 0.0;

  Curvatures curvatures() const { return {gamma1, gamma2, gamma3, gamma4}; }
};

/// Tangent basis b_i = (delta_i, -dh/du_i), normal f = (grad h, 1) and the
/// induced metric at a boundary point.
struct LocalFrame {
  std::vector<Eigen::VectorXd> b;
  Eigen::VectorXd f;
  Eigen::MatrixXd g;
  Eigen::MatrixXd g_inv;
};

/// lambda(u) = lambda0 + lambda_i u_i + lambda_ij u_i u_j.
struct NormalShift {
  double lambda0 = 0.0;
  std::vector<double> lambda1;
  std::vector<double> lambda2;  // q*q row-major, symmetric

  static NormalShift constant(int q, double lambda0) {
    NormalShift s;
    s.lambda0 = lambda0;
    s.lambda1.assign(q, 0.0);
    s.lambda2.assign(static_cast<std::size_t>(q) * q, 0.0);
    return s;
  }

  double value(std::span<const double> u) const {
    const auto q = lambda1.size();
    double s = lambda0;
    for (std::size_t i = 0; i < q; ++i) {
      s += lambda1[i] * u[i];
      for (std::size_t j = 0; j < q; ++j) s += lambda2[i * q + j] * u[i] * u[j];
    }
    return s;
  }
};

// ---------------------------------------------------------------------------
// Summaries

inline Curvatures gamma_summary(const SurfaceJet& jet) {
  const int q = jet.q();
  const Eigen::MatrixXd d = jet.second_order();
  const Eigen::MatrixXd d2 = d * d;
  Curvatures c;
  c.gamma1 = d.trace();
  c.gamma2 = d2.trace();
  c.gamma3 = (d2 * d).trace();
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) c.gamma4 += jet.h4(i, i, j, j);
  return c;
}

inline GeometricSummary beta_summary(const Curvatures& g, double lambda0) {
  GeometricSummary s;
  s.gamma1 = g.gamma1;
  s.gamma2 = g.gamma2;
  s.gamma3 = g.gamma3;
  s.gamma4 = g.gamma4;
  s.beta0 = lambda0;
  s.beta1 = g.gamma1 - lambda0 * g.gamma2 + 4.0 / 3.0 * lambda0 * lambda0 * g.gamma3;
  s.beta2 = 3.0 * g.gamma4 - g.gamma1 * g.gamma2 - 4.0 / 3.0 * g.gamma3;
  s.beta3 = 6.0 * g.gamma4 - 2.0 * g.gamma1 * g.gamma2 - 4.0 * g.gamma3;
  return s;
}

// ---------------------------------------------------------------------------
// Local coordinates

inline LocalFrame local_frame(const SurfaceJet& jet, std::span<const double> u) {
  const int q = jet.q();
  const Eigen::VectorXd grad = jet.gradient(u);
  LocalFrame fr;
  fr.f.resize(q + 1);
  fr.f.head(q) = grad;
  fr.f[q] = 1.0;
  fr.b.reserve(q);
  for (int i = 0; i < q; ++i) {
    Eigen::VectorXd bi = Eigen::VectorXd::Zero(q + 1);
    bi[i] = 1.0;
    bi[q] = -grad[i];
    fr.b.push_back(std::move(bi));
  }
  fr.g = Eigen::MatrixXd::Identity(q, q) + grad * grad.transpose();
  fr.g_inv = fr.g.inverse();
  return fr;
}

/// Jet of the same surface in the (du, dv) frame anchored at (u, -h(u)).
inline SurfaceJet local_jet(const SurfaceJet& jet, std::span<const double> u) {
  const int q = jet.q();
  const Eigen::MatrixXd d = jet.second_order();
  Eigen::VectorXd uv(q);
  for (int i = 0; i < q; ++i) uv[i] = u[i];
  const Eigen::VectorXd du = d * uv;
  const double du2 = du.squaredNorm();
  const Eigen::VectorXd ddu = d * du;

  SurfaceJet out(q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      double s = jet.h2(i, j) - 2.0 * jet.h2(i, j) * du2;
      for (int k = 0; k < q; ++k) {
        s += 3.0 * jet.h3(i, j, k) * u[k];
        for (int l = 0; l < q; ++l) s += 6.0 * jet.h4(i, j, k, l) * u[k] * u[l];
      }
      out.h2(i, j) = s;
    }
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      for (int k = 0; k < q; ++k) {
        double s = jet.h3(i, j, k);
        for (int l = 0; l < q; ++l) s += 4.0 * jet.h4(i, j, k, l) * u[l];
        s -= 4.0 / 3.0 * (jet.h2(i, j) * ddu[k] + jet.h2(i, k) * ddu[j] + jet.h2(j, k) * ddu[i]);
        out.h3(i, j, k) = s;
      }
  out.tensor(4) = jet.tensor(4);
  out.symmetrize();
  return out;
}

namespace detail {

inline Curvatures traces(const Eigen::MatrixXd& dtilde, const Eigen::MatrixXd& g_inv,
                         const SurfaceJet& fourth) {
  const int q = static_cast<int>(dtilde.rows());
  const Eigen::MatrixXd a = dtilde * g_inv;
  const Eigen::MatrixXd a2 = a * a;
  Curvatures c;
  c.gamma1 = a.trace();
  c.gamma2 = a2.trace();
  c.gamma3 = (a2 * a).trace();
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      for (int k = 0; k < q; ++k)
        for (int l = 0; l < q; ++l) c.gamma4 += fourth.h4(i, j, k, l) * g_inv(i, j) * g_inv(k, l);
  return c;
}

}  // namespace detail

/// Geometric quantities at (u, -h(u)) from the trace formulas with the exact
/// metric and the exact second-order coefficient (half Hessian over |f|).
inline Curvatures curvatures_at(const SurfaceJet& jet, std::span<const double> u) {
  const LocalFrame fr = local_frame(jet, u);
  const Eigen::MatrixXd dtilde = jet.half_hessian(u) / fr.f.norm();
  return detail::traces(dtilde, fr.g_inv, jet);
}

/// Same traces, but with the second-order coefficients of local_jet.
inline Curvatures curvatures_from_local_jet(const SurfaceJet& jet, std::span<const double> u) {
  const LocalFrame fr = local_frame(jet, u);
  const SurfaceJet loc = local_jet(jet, u);
  return detail::traces(loc.second_order(), fr.g_inv, loc);
}

/// Truncated polynomial expansions of gamma_k(h, u) in u.
inline Curvatures curvatures_at_truncated(const SurfaceJet& jet, std::span<const double> u) {
  const int q = jet.q();
  const Eigen::MatrixXd d = jet.second_order();
  Eigen::VectorXd uv(q);
  for (int i = 0; i < q; ++i) uv[i] = u[i];
  const Eigen::VectorXd du = d * uv;
  Curvatures c = gamma_summary(jet);
  for (int i = 0; i < q; ++i)
    for (int k = 0; k < q; ++k) {
      c.gamma1 += 3.0 * jet.h3(i, i, k) * u[k];
      for (int l = 0; l < q; ++l) c.gamma1 += 6.0 * jet.h4(i, i, k, l) * u[k] * u[l];
    }
  c.gamma1 += -2.0 * d.trace() * du.squaredNorm() - 4.0 * du.dot(d * du);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      for (int k = 0; k < q; ++k) c.gamma2 += 6.0 * jet.h2(i, j) * jet.h3(i, j, k) * u[k];
  return c;
}

// ---------------------------------------------------------------------------
// Normal shifts and contour surfaces

namespace detail {

// sum_m h_mi h_mjk + h_mj h_mik + h_mk h_mij
inline double mixed23(const SurfaceJet& h, int i, int j, int k) {
  double s = 0.0;
  for (int m = 0; m < h.q(); ++m)
    s += h.h2(m, i) * h.h3(m, j, k) + h.h2(m, j) * h.h3(m, i, k) + h.h2(m, k) * h.h3(m, i, j);
  return s;
}

// Terms shared by the shift and contour formulas.
struct JetProducts {
  Eigen::MatrixXd d, dd, ddd;
  double trace_d = 0.0;
  Eigen::VectorXd trace3;   // sum_m h_mmi
  Eigen::VectorXd dt3;      // sum_ml h_ml h_mli
  Eigen::VectorXd d_trace3; // sum_m h_mi sum_l h_mll
  Eigen::MatrixXd trace4;   // sum_m h_mmij

  explicit JetProducts(const SurfaceJet& h) {
    const int q = h.q();
    d = h.second_order();
    dd = d * d;
    ddd = dd * d;
    trace_d = d.trace();
    trace3 = Eigen::VectorXd::Zero(q);
    dt3 = Eigen::VectorXd::Zero(q);
    trace4 = Eigen::MatrixXd::Zero(q, q);
    for (int i = 0; i < q; ++i)
      for (int m = 0; m < q; ++m) {
        trace3[i] += h.h3(m, m, i);
        for (int l = 0; l < q; ++l) dt3[i] += h.h2(m, l) * h.h3(m, l, i);
      }
    d_trace3 = d * trace3;
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j)
        for (int m = 0; m < q; ++m) trace4(i, j) += h.h4(m, m, i, j);
  }
};

}  // namespace detail

/// s = M(h, lambda): the surface reached by moving each boundary point a
/// distance lambda(u) along its unit normal.
inline SurfaceJet shift_surface(const SurfaceJet& h, const NormalShift& shift) {
  const int q = h.q();
  const detail::JetProducts p(h);
  const double l0 = shift.lambda0;
  SurfaceJet s(q);
  s.h0() = h.h0() - l0;
  for (int i = 0; i < q; ++i) {
    double acc = h.h1(i) - shift.lambda1[i];
    for (int m = 0; m < q; ++m) acc -= 2.0 * l0 * h.h2(m, i) * (h.h1(m) - shift.lambda1[m]);
    s.h1(i) = acc;
  }
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      s.h2(i, j) = h.h2(i, j) - shift.lambda2[i * q + j] - 2.0 * l0 * p.dd(i, j) + 4.0 * l0 * l0 * p.ddd(i, j);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      for (int k = 0; k < q; ++k) s.h3(i, j, k) = h.h3(i, j, k) - 2.0 * l0 * detail::mixed23(h, i, j, k);
  s.tensor(4) = h.tensor(4);
  s.symmetrize();
  return s;
}

/// kappa(theta): deviation of the contour shift, truncated polynomial form.
inline double kappa(const SurfaceJet& h, double lambda0, std::span<const double> theta) {
  const int q = h.q();
  const detail::JetProducts p(h);
  double k = 0.0;
  for (int i = 0; i < q; ++i) {
    k += (3.0 * p.trace3[i] - 6.0 * lambda0 * p.dt3[i]) * theta[i];
    for (int j = 0; j < q; ++j)
      k += (6.0 * p.trace4(i, j) - 2.0 * p.trace_d * p.dd(i, j) - 4.0 * p.ddd(i, j)) * theta[i] * theta[j];
  }
  return k;
}

/// s = L_{sigma2}(h, lambda0), the contour surface of the bootstrap
/// probability through (0, lambda0 - h0), together with its normal shift
/// lambda(u) = lambda0 - sigma2 kappa(u). sigma2 may be zero or negative.
inline std::pair<SurfaceJet, NormalShift> contour_jet(const SurfaceJet& h, double lambda0, double sigma2) {
  const int q = h.q();
  const detail::JetProducts p(h);
  const double l0 = lambda0;

  NormalShift shift = NormalShift::constant(q, l0);
  for (int i = 0; i < q; ++i) shift.lambda1[i] = sigma2 * (-3.0 * p.trace3[i] + 6.0 * l0 * p.dt3[i]);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      shift.lambda2[i * q + j] =
          sigma2 * (-6.0 * p.trace4(i, j) + 2.0 * p.trace_d * p.dd(i, j) + 4.0 * p.ddd(i, j));

  SurfaceJet s(q);
  s.h0() = h.h0() - l0;
  for (int i = 0; i < q; ++i) {
    double hm_hmi = 0.0;
    for (int m = 0; m < q; ++m) hm_hmi += h.h1(m) * h.h2(m, i);
    s.h1(i) = h.h1(i) - 2.0 * l0 * hm_hmi +
              sigma2 * (3.0 * p.trace3[i] - 6.0 * l0 * p.dt3[i] - 6.0 * l0 * p.d_trace3[i]);
  }
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      s.h2(i, j) = h.h2(i, j) - 2.0 * l0 * p.dd(i, j) + 4.0 * l0 * l0 * p.ddd(i, j) +
                   sigma2 * (6.0 * p.trace4(i, j) - 2.0 * p.trace_d * p.dd(i, j) - 4.0 * p.ddd(i, j));
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      for (int k = 0; k < q; ++k) s.h3(i, j, k) = h.h3(i, j, k) - 2.0 * l0 * detail::mixed23(h, i, j, k);
  s.tensor(4) = h.tensor(4);
  s.symmetrize();
  return {std::move(s), std::move(shift)};
}

// ---------------------------------------------------------------------------
// Jet arithmetic and transforms

/// Product of two polynomials truncated at degree four.
inline SurfaceJet jet_product(const SurfaceJet& a, const SurfaceJet& b) {
  const int q = a.q();
  if (b.q() != q) throw InvalidArgument("jet_product", "dimension mismatch");
  SurfaceJet out(q);
  for (int n = 0; n <= SurfaceJet::kMaxOrder; ++n) {
    auto& t = out.tensor(n);
    for (int k = 0; k <= n; ++k) {
      const auto& ta = a.tensor(k);
      const auto& tb = b.tensor(n - k);
      for (std::size_t ia = 0; ia < ta.size(); ++ia) {
        if (ta[ia] == 0.0) continue;
        for (std::size_t ib = 0; ib < tb.size(); ++ib) t[ia * tb.size() + ib] += ta[ia] * tb[ib];
      }
    }
  }
  out.symmetrize();
  return out;
}

/// Applies an orthogonal q x q matrix to every tensor index, so that the
/// rotated jet evaluated at R u equals the original at u.
inline SurfaceJet rotate_jet(const SurfaceJet& jet, const Eigen::MatrixXd& r) {
  const int q = jet.q();
  SurfaceJet out(q);
  out.h0() = jet.h0();
  for (int d = 1; d <= SurfaceJet::kMaxOrder; ++d) {
    std::vector<double> cur = jet.tensor(d);
    // Transform one index position at a time.
    std::size_t stride = 1;
    for (int a = 1; a < d; ++a) stride *= q;
    for (int pos = 0; pos < d; ++pos) {
      std::vector<double> next(cur.size(), 0.0);
      std::size_t st = 1;
      for (int a = pos + 1; a < d; ++a) st *= q;
      for (std::size_t flat = 0; flat < cur.size(); ++flat) {
        const int old_idx = static_cast<int>((flat / st) % q);
        const std::size_t base = flat - old_idx * st;
        for (int i = 0; i < q; ++i) next[base + i * st] += r(i, old_idx) * cur[flat];
      }
      cur = std::move(next);
    }
    out.tensor(d) = std::move(cur);
    (void)stride;
  }
  return out;
}

/// Scales coefficients by the class-S order schedule:
/// h2 * eps, h3 * eps^2, h4 * eps^3, h1 * eps^2.
inline SurfaceJet scale_jet_orders(const SurfaceJet& jet, double eps) {
  SurfaceJet out = jet;
  for (auto& v : out.tensor(1)) v *= eps * eps;
  for (auto& v : out.tensor(2)) v *= eps;
  for (auto& v : out.tensor(3)) v *= eps * eps;
  for (auto& v : out.tensor(4)) v *= eps * eps * eps;
  return out;
}

// ---------------------------------------------------------------------------
// Gaussian moments

/// E(U_{i1} ... U_{ik}) for U ~ N(0, I): sum over pairings of Kronecker deltas.
inline double gaussian_moment(std::span<const int> indices) {
  if (indices.empty()) return 1.0;
  if (indices.size() % 2 == 1) return 0.0;
  const int first = indices[0];
  double total = 0.0;
  std::vector<int> rest(indices.begin() + 1, indices.end());
  for (std::size_t j = 0; j < rest.size(); ++j) {
    if (rest[j] != first) continue;
    std::vector<int> remaining;
    remaining.reserve(rest.size() - 1);
    for (std::size_t k = 0; k < rest.size(); ++k)
      if (k != j) remaining.push_back(rest[k]);
    total += gaussian_moment(remaining);
  }
  return total;
}

inline double gaussian_moment(std::initializer_list<int> indices) {
  return gaussian_moment(std::span<const int>(indices.begin(), indices.size()));
}

// ---------------------------------------------------------------------------
// JSON: {q, h0, h1, h2, h3, h4} with nested row-major arrays.

namespace detail {

inline nlohmann::json nest(const std::vector<double>& flat, int q, int depth, std::size_t offset = 0) {
  if (depth == 0) return flat[offset];
  nlohmann::json arr = nlohmann::json::array();
  std::size_t stride = 1;
  for (int a = 1; a < depth; ++a) stride *= q;
  for (int i = 0; i < q; ++i) arr.push_back(nest(flat, q, depth - 1, offset + i * stride));
  return arr;
}

inline void unnest(const nlohmann::json& j, int q, int depth, std::vector<double>& out) {
  if (depth == 0) {
    out.push_back(j.get<double>());
    return;
  }
  if (!j.is_array() || static_cast<int>(j.size()) != q)
    throw InvalidArgument("SurfaceJet", "tensor shape does not match q");
  for (const auto& e : j) unnest(e, q, depth - 1, out);
}

}  // namespace detail

inline nlohmann::json jet_to_json(const SurfaceJet& jet) {
  const int q = jet.q();
  nlohmann::json j;
  j["q"] = q;
  j["h0"] = jet.h0();
  j["h1"] = jet.tensor(1);
  for (int d = 2; d <= SurfaceJet::kMaxOrder; ++d) j["h" + std::to_string(d)] = detail::nest(jet.tensor(d), q, d);
  return j;
}

inline SurfaceJet jet_from_json(const nlohmann::json& j) {
  const int q = j.at("q").get<int>();
  SurfaceJet jet(q);
  jet.h0() = j.value("h0", 0.0);
  for (int d = 1; d <= SurfaceJet::kMaxOrder; ++d) {
    const std::string key = "h" + std::to_string(d);
    if (!j.contains(key)) continue;
    std::vector<double> flat;
    detail::unnest(j.at(key), q, d, flat);
    jet.tensor(d) = std::move(flat);
  }
  jet.symmetrize();
  return jet;
}

}  // namespace regionboot
