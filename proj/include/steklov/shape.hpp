#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "steklov/errors.hpp"

namespace steklov {

using Vec3 = Eigen::Vector3d;

/// Warped 2D metric dr^2 + f(r)^2 dtheta^2 given by samples of f on [0, R].
/// Requires f(0) = 0, f'(0) = 1 and f > 0 on (0, R].
struct RotSymProfile {
  double R = 1.0;
  std::vector<double> r;  // ascending sample abscissae, r.front() == 0
  std::vector<double> f;  // samples of the warping function
};

enum class ShapeKind { Ball, Ellipsoid, RotSym };

/// Analytic convex domain: ball, axis-aligned ellipsoid, or a rotationally
/// symmetric 2D metric given by a profile. Balls and ellipsoids supply exact
/// boundary geometry (normals, principal curvatures, distance to boundary).
class ShapeSpec {
 public:
  static ShapeSpec ball(int dim, double radius, Vec3 center = Vec3::Zero()) {
    if (dim != 2 && dim != 3) throw ContractError("ShapeSpec: dim must be 2 or 3");
    if (!(radius > 0.0)) throw ContractError("ShapeSpec: radius must be positive");
    ShapeSpec s;
    s.kind_ = ShapeKind::Ball;
    s.dim_ = dim;
    s.axes_ = {radius, radius, radius};
    s.center_ = center;
    return s;
  }

  static ShapeSpec ellipsoid(std::vector<double> semi_axes, Vec3 center = Vec3::Zero()) {
    const int dim = static_cast<int>(semi_axes.size());
    if (dim != 2 && dim != 3) throw ContractError("ShapeSpec: need 2 or 3 semi-axes");
    for (double a : semi_axes)
      if (!(a > 0.0)) throw ContractError("ShapeSpec: semi-axes must be positive");
    for (int i = 0; i + 1 < dim; ++i)
      if (semi_axes[i] < semi_axes[i + 1])
        throw ContractError("ShapeSpec: semi-axes must be sorted descending");
    ShapeSpec s;
    s.kind_ = ShapeKind::Ellipsoid;
    s.dim_ = dim;
    s.axes_ = {semi_axes[0], semi_axes[1], dim == 3 ? semi_axes[2] : 0.0};
    s.center_ = center;
    return s;
  }

  static ShapeSpec rotsym(RotSymProfile profile) {
    if (profile.r.size() != profile.f.size() || profile.r.size() < 4)
      throw ContractError("RotSymProfile: need matching sample arrays, at least 4 points");
    if (profile.r.front() != 0.0 || std::abs(profile.f.front()) > 1e-14)
      throw ContractError("RotSymProfile: f(0) = 0 required");
    for (size_t i = 1; i < profile.r.size(); ++i) {
      if (profile.r[i] <= profile.r[i - 1])
        throw ContractError("RotSymProfile: sample abscissae must be strictly increasing");
      if (!(profile.f[i] > 0.0))
        throw ContractError("RotSymProfile: f must be strictly positive on (0, R]");
    }
    ShapeSpec s;
    s.kind_ = ShapeKind::RotSym;
    s.dim_ = 2;
    s.profile_ = std::move(profile);
    return s;
  }

  ShapeKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Vec3& center() const { return center_; }
  double axis(int i) const { return axes_[i]; }
  double max_axis() const { return axes_[0]; }
  double min_axis() const { return axes_[dim_ - 1]; }
  double radius() const {
    if (kind_ != ShapeKind::Ball) throw ContractError("radius(): not a ball");
    return axes_[0];
  }
  double diameter() const { return 2.0 * axes_[0]; }
  const RotSymProfile& profile() const {
    if (kind_ != ShapeKind::RotSym) throw ContractError("profile(): not a rotsym shape");
    return profile_;
  }

  /// Level function F(x) = sum ((x_i - c_i)/a_i)^2; boundary is F = 1.
  double level(const Vec3& p) const {
    require_analytic();
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) {
      const double t = (p[i] - center_[i]) / axes_[i];
      s += t * t;
    }
    return s;
  }

  bool contains(const Vec3& p, double tol = 1e-12) const { return level(p) <= 1.0 + tol; }

  void require_analytic() const {
    if (kind_ == ShapeKind::RotSym)
      throw UnsupportedShapeError("operation not supported for RotSymProfile shapes");
  }

 private:
  ShapeSpec() = default;
  ShapeKind kind_ = ShapeKind::Ball;
  int dim_ = 2;
  std::array<double, 3> axes_ = {1.0, 1.0, 1.0};
  Vec3 center_ = Vec3::Zero();
  RotSymProfile profile_;
};

// ---------------------------------------------------------------------------
// Boundary geometry of analytic shapes
// ---------------------------------------------------------------------------

/// Outward unit normal of the level set at a boundary point.
inline Vec3 boundary_normal(const ShapeSpec& shape, const Vec3& p) {
  shape.require_analytic();
  Vec3 g = Vec3::Zero();
  for (int i = 0; i < shape.dim(); ++i)
    g[i] = 2.0 * (p[i] - shape.center()[i]) / (shape.axis(i) * shape.axis(i));
  const double n = g.norm();
  if (n == 0.0) throw NumericalError("boundary_normal: zero gradient");
  return g / n;
}

/// Principal curvatures (ascending) at a boundary point, from the exact
/// Weingarten map of the level set.
inline std::vector<double> principal_curvatures(const ShapeSpec& shape, const Vec3& p) {
  shape.require_analytic();
  const int d = shape.dim();
  Eigen::Matrix3d hess = Eigen::Matrix3d::Zero();
  Vec3 grad = Vec3::Zero();
  for (int i = 0; i < d; ++i) {
    const double a2 = shape.axis(i) * shape.axis(i);
    hess(i, i) = 2.0 / a2;
    grad[i] = 2.0 * (p[i] - shape.center()[i]) / a2;
  }
  const double gnorm = grad.norm();
  if (gnorm == 0.0) throw NumericalError("principal_curvatures: zero gradient");
  const Vec3 n = grad / gnorm;

  // Orthonormal tangent basis via Householder of the normal.
  Eigen::Matrix3d T;
  {
    Vec3 e = Vec3::Zero();
    int k = 0;
    for (int i = 1; i < 3; ++i)
      if (std::abs(n[i]) > std::abs(n[k])) k = i;
    e[k] = n[k] >= 0 ? 1.0 : -1.0;
    Vec3 v = n + e;
    T = Eigen::Matrix3d::Identity() - 2.0 * v * v.transpose() / v.squaredNorm();
  }
  // Columns of T other than the one (anti)parallel to n span the tangent space
  // of the full 3D frame; in 2D the z axis is spurious and dropped below.
  std::vector<Vec3> tangents;
  for (int c = 0; c < 3; ++c) {
    Vec3 col = T.col(c);
    if (std::abs(col.dot(n)) > 0.5) continue;  // the normal column
    if (d == 2 && std::abs(col[2]) > 0.5) continue;
    tangents.push_back(col);
  }
  // In 2D the Householder frame may mix y and z; re-orthogonalize inside the
  // xy-plane instead.
  if (d == 2) {
    Vec3 t(-n[1], n[0], 0.0);
    tangents = {t};
  }
  const int m = static_cast<int>(tangents.size());
  Eigen::MatrixXd B(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      B(i, j) = tangents[i].dot(hess * tangents[j]) / gnorm;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + m);
  return out;
}

inline double mean_curvature(const ShapeSpec& shape, const Vec3& p) {
  const auto ks = principal_curvatures(shape, p);
  double s = 0.0;
  for (double k : ks) s += k;
  return s;
}

/// Full ambient second-fundamental-form matrix W with h(u, v) = u^T W v for
/// tangent vectors u, v.
inline Eigen::Matrix3d second_fundamental_form(const ShapeSpec& shape, const Vec3& p) {
  shape.require_analytic();
  const int d = shape.dim();
  Eigen::Matrix3d hess = Eigen::Matrix3d::Zero();
  Vec3 grad = Vec3::Zero();
  for (int i = 0; i < d; ++i) {
    const double a2 = shape.axis(i) * shape.axis(i);
    hess(i, i) = 2.0 / a2;
    grad[i] = 2.0 * (p[i] - shape.center()[i]) / a2;
  }
  const double gnorm = grad.norm();
  const Vec3 n = grad / gnorm;
  const Eigen::Matrix3d P = Eigen::Matrix3d::Identity() - n * n.transpose();
  return P * hess * P / gnorm;
}

/// Exact infimum over the boundary of the smallest principal curvature.
/// Ball(R) -> 1/R; ellipsoids attain the minimum at the minor-axis endpoints,
/// which the sample set contains, so the sampled minimum is exact.
inline double min_principal_curvature(const ShapeSpec& shape) {
  shape.require_analytic();
  if (shape.kind() == ShapeKind::Ball) return 1.0 / shape.radius();
  const int d = shape.dim();
  double best = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vec3& p) {
    const auto ks = principal_curvatures(shape, p);
    best = std::min(best, ks.front());
  };
  const double a = shape.axis(0), b = shape.axis(1);
  if (d == 2) {
    consider(shape.center() + Vec3(a, 0, 0));
    consider(shape.center() + Vec3(0, b, 0));
    const int N = 2048;
    for (int i = 0; i < N; ++i) {
      const double th = 2.0 * M_PI * i / N;
      consider(shape.center() + Vec3(a * std::cos(th), b * std::sin(th), 0));
    }
  } else {
    const double c = shape.axis(2);
    consider(shape.center() + Vec3(a, 0, 0));
    consider(shape.center() + Vec3(0, b, 0));
    consider(shape.center() + Vec3(0, 0, c));
    const int Np = 96, Nt = 192;
    for (int i = 1; i < Np; ++i) {
      const double ph = M_PI * i / Np;
      for (int j = 0; j < Nt; ++j) {
        const double th = 2.0 * M_PI * j / Nt;
        consider(shape.center() + Vec3(a * std::sin(ph) * std::cos(th),
                                       b * std::sin(ph) * std::sin(th), c * std::cos(ph)));
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Nearest-point projection onto the boundary
// ---------------------------------------------------------------------------

namespace detail {

/// Nearest point on the ellipsoid with semi-axes a[0..n-1] from an interior
/// point with nonnegative coordinates w. Works in any floating scalar.
/// Components equal to zero are handled by branch enumeration: the foot may
/// leave a symmetry plane (this is exactly the cut-locus situation).
template <class S>
void ellipsoid_foot_positive(int n, const S* a, const S* w_in, S* foot) {
  // Components within roundoff of a symmetry plane are folded onto it; their
  // feet are then found by the off-plane branches (the cut-locus case), which
  // the scalar solve cannot resolve for denormal offsets.
  S amin = a[0];
  for (int i = 1; i < n; ++i) amin = std::min(amin, a[i]);
  std::array<S, 3> w{};
  for (int i = 0; i < n; ++i) w[i] = w_in[i] > S(1e-12) * amin ? w_in[i] : S(0);

  std::vector<int> sup, zer;
  for (int i = 0; i < n; ++i) (w[i] > S(0) ? sup : zer).push_back(i);

  for (int i = 0; i < n; ++i) foot[i] = S(0);

  if (sup.empty()) {
    // Exact center: nearest boundary point along the shortest axis.
    foot[n - 1] = a[n - 1];
    return;
  }

  // Scalar KKT equation on the support: p_i = a_i^2 w_i / (t + a_i^2),
  // G(t) = sum (p_i/a_i)^2 - 1, strictly decreasing on (-min a_i^2, inf).
  auto solve_support = [&](const std::vector<int>& idx, S* p) -> bool {
    S m = a[idx[0]] * a[idx[0]];
    for (int i : idx) m = std::min(m, a[i] * a[i]);
    auto G = [&](S t) {
      S s = S(0);
      for (int i : idx) {
        const S q = a[i] * w[i] / (t + a[i] * a[i]);
        s += q * q;
      }
      return s - S(1);
    };
    // Interior point: G(0) < 0. Walk the lower end toward -m until G > 0.
    S hi = S(0);
    if (G(hi) > S(0)) return false;  // not interior (or on boundary); caller checks
    S lo = S(0);
    bool bracketed = false;
    for (int k = 1; k <= 120; ++k) {
      lo = -m * (S(1) - std::pow(S(0.5), S(k)));
      if (G(lo) > S(0)) {
        bracketed = true;
        break;
      }
      hi = lo;
    }
    if (!bracketed) {
      // w is (numerically) on a symmetry plane: t -> -m branch; signal the
      // caller to rely on the off-plane branches instead.
      return false;
    }
    for (int it = 0; it < 200 && hi - lo > std::numeric_limits<S>::epsilon() * m; ++it) {
      const S mid = (lo + hi) / S(2);
      (G(mid) > S(0) ? lo : hi) = mid;
    }
    const S t = (lo + hi) / S(2);
    for (int i : idx) p[i] = a[i] * a[i] * w[i] / (t + a[i] * a[i]);
    return true;
  };

  S best = std::numeric_limits<S>::infinity();
  std::array<S, 3> cand{};
  auto keep = [&](const std::array<S, 3>& p) {
    S d2 = S(0);
    for (int i = 0; i < n; ++i) d2 += (p[i] - w[i]) * (p[i] - w[i]);
    if (!std::isfinite((double)d2)) return;
    if (d2 < best) {
      best = d2;
      for (int i = 0; i < n; ++i) foot[i] = p[i];
    }
  };

  // Branch 1: foot supported on the nonzero coordinates only.
  if (sup.size() == 1) {
    std::array<S, 3> p{};
    p[sup[0]] = a[sup[0]];
    keep(p);
  } else {
    std::array<S, 3> p{};
    if (solve_support(sup, p.data())) keep(p);
  }

  // Branch 2: foot leaves the symmetry plane of a zero coordinate j.
  for (int j : zer) {
    const S aj2 = a[j] * a[j];
    std::array<S, 3> p{};
    S q = S(0);
    bool ok = true;
    for (int i : sup) {
      const S denom = a[i] * a[i] - aj2;
      if (denom <= S(0)) {
        ok = false;  // coincident axis length; covered by branch 1 symmetry
        break;
      }
      p[i] = a[i] * a[i] * w[i] / denom;
      const S r = p[i] / a[i];
      q += r * r;
    }
    if (!ok || q >= S(1)) continue;
    p[j] = a[j] * std::sqrt(S(1) - q);
    keep(p);
  }
  if (!std::isfinite((double)best))
    throw NumericalError("ellipsoid projection: no admissible foot candidate");
}

template <class S>
struct FootData {
  S rho;
  std::array<S, 3> foot;
  bool degenerate;
};

/// Distance and foot point on the boundary for an interior point, any scalar.
template <class S>
FootData<S> analytic_foot(const ShapeSpec& shape, const std::array<S, 3>& point) {
  shape.require_analytic();
  const int d = shape.dim();
  std::array<S, 3> y{};  // centered
  for (int i = 0; i < d; ++i) y[i] = point[i] - S(shape.center()[i]);

  S lvl = S(0);
  for (int i = 0; i < d; ++i) {
    const S t = y[i] / S(shape.axis(i));
    lvl += t * t;
  }
  if (lvl > S(1) + S(1e-10))
    throw DomainError("signed_projection: point lies outside the domain");

  FootData<S> out;
  out.degenerate = false;

  if (shape.kind() == ShapeKind::Ball) {
    const S R = S(shape.radius());
    S r = S(0);
    for (int i = 0; i < d; ++i) r += y[i] * y[i];
    r = std::sqrt(r);
    if (r == S(0)) {
      out.degenerate = true;
      out.rho = R;
      out.foot = {S(shape.center()[0]) + R, S(shape.center()[1]), S(shape.center()[2])};
      return out;
    }
    out.rho = R - r;
    for (int i = 0; i < 3; ++i)
      out.foot[i] = S(shape.center()[i]) + (i < d ? y[i] * R / r : S(0));
    return out;
  }

  // Points numerically on the boundary: radial snap is exact to O(rho^2).
  if (lvl > S(1) - S(1e-13)) {
    const S s = std::sqrt(lvl);
    out.rho = S(0);
    S d2 = S(0);
    for (int i = 0; i < d; ++i) {
      const S fi = y[i] / s;
      d2 += (fi - y[i]) * (fi - y[i]);
      out.foot[i] = S(shape.center()[i]) + fi;
    }
    for (int i = d; i < 3; ++i) out.foot[i] = S(shape.center()[i]);
    out.rho = std::sqrt(d2);
    return out;
  }

  // Ellipsoid: fold into the positive orthant, project, unfold.
  std::array<S, 3> a{}, w{}, p{};
  std::array<S, 3> sgn{S(1), S(1), S(1)};
  bool center = true;
  for (int i = 0; i < d; ++i) {
    a[i] = S(shape.axis(i));
    sgn[i] = y[i] < S(0) ? S(-1) : S(1);
    w[i] = std::abs(y[i]);
    if (w[i] != S(0)) center = false;
  }
  ellipsoid_foot_positive<S>(d, a.data(), w.data(), p.data());
  out.degenerate = center;
  S d2 = S(0);
  for (int i = 0; i < d; ++i) d2 += (p[i] - w[i]) * (p[i] - w[i]);
  out.rho = std::sqrt(d2);
  for (int i = 0; i < 3; ++i)
    out.foot[i] = S(shape.center()[i]) + (i < d ? sgn[i] * p[i] : S(0));
  return out;
}

}  // namespace detail

/// Result of projecting an interior point onto the boundary.
struct Projection {
  double rho;       // distance to the boundary
  Vec3 foot;        // nearest boundary point
  Vec3 normal;      // outward unit normal at the foot
  bool degenerate;  // foot non-unique by symmetry (exact center)
};

/// Distance to the boundary and the nearest boundary point with its outward
/// normal. Interior (or boundary) points only.
inline Projection signed_projection(const ShapeSpec& shape, const Vec3& point) {
  std::array<double, 3> p{point[0], point[1], point[2]};
  const auto f = detail::analytic_foot<double>(shape, p);
  Projection out;
  out.rho = std::max(0.0, f.rho);
  out.foot = Vec3(f.foot[0], f.foot[1], f.foot[2]);
  out.degenerate = f.degenerate;
  out.normal = boundary_normal(shape, out.foot);
  return out;
}

/// Distance to the boundary in extended precision; used by the finite
/// difference Hessian sweep where double roundoff in the second difference
/// would mask the comparison being checked.
inline long double distance_to_boundary_ld(const ShapeSpec& shape,
                                           const std::array<long double, 3>& point) {
  return detail::analytic_foot<long double>(shape, point).rho;
}

/// Max pairwise spread of foot points among projections of x and of the
/// probes x +- probe_step e_i (probes outside the domain are skipped).
/// A large spread with nearly equal distances marks the cut locus.
inline double projection_spread(const ShapeSpec& shape, const Vec3& x, double probe_step) {
  std::vector<Vec3> feet;
  feet.push_back(signed_projection(shape, x).foot);
  for (int i = 0; i < shape.dim(); ++i) {
    for (double s : {-1.0, 1.0}) {
      Vec3 q = x;
      q[i] += s * probe_step;
      if (!shape.contains(q)) continue;
      feet.push_back(signed_projection(shape, q).foot);
    }
  }
  double spread = 0.0;
  for (size_t i = 0; i < feet.size(); ++i)
    for (size_t j = i + 1; j < feet.size(); ++j)
      spread = std::max(spread, (feet[i] - feet[j]).norm());
  return spread;
}

/// The paper's weight evaluated pointwise: V = rho - (c/2) rho^2.
inline double weight_V(double rho, double c) {
  if (rho < 0.0) throw ContractError("weight_V: rho must be nonnegative");
  return rho - 0.5 * c * rho * rho;
}

}  // namespace steklov
