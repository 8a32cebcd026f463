#pragma once

#include <Eigen/Dense>
#include <cfloat>
#include <functional>
#include <map>
#include <string>

#include "steklov/fem.hpp"
#include "steklov/mesh.hpp"
#include "steklov/quadrature.hpp"
#include "steklov/shape.hpp"

namespace steklov {

/// Closed-form scalar field with exact first and second derivatives.
struct AnalyticField {
  std::function<double(const Vec3&)> value;
  std::function<Vec3(const Vec3&)> grad;
  std::function<Eigen::Matrix3d(const Vec3&)> hess;
};

inline AnalyticField coordinate_field(int i) {
  AnalyticField f;
  f.value = [i](const Vec3& p) { return p[i]; };
  f.grad = [i](const Vec3&) { Vec3 g = Vec3::Zero(); g[i] = 1.0; return g; };
  f.hess = [](const Vec3&) { return Eigen::Matrix3d::Zero(); };
  return f;
}

/// Harmonic quadratic x^2 - y^2.
inline AnalyticField saddle_field() {
  AnalyticField f;
  f.value = [](const Vec3& p) { return p[0] * p[0] - p[1] * p[1]; };
  f.grad = [](const Vec3& p) { return Vec3(2.0 * p[0], -2.0 * p[1], 0.0); };
  f.hess = [](const Vec3&) {
    Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
    H(0, 0) = 2.0;
    H(1, 1) = -2.0;
    return H;
  };
  return f;
}

/// The paper's weight V = rho - (c/2) rho^2 on a ball with c = 1/R, where it
/// collapses to the globally smooth form (R^2 - r^2) / (2R).
inline AnalyticField ball_weight(const ShapeSpec& ball, double c) {
  if (ball.kind() != ShapeKind::Ball)
    throw ContractError("ball_weight: shape must be a ball");
  const double R = ball.radius();
  if (std::abs(c * R - 1.0) > 1e-12)
    throw ContractError("ball_weight: closed form requires c = 1/R");
  const Vec3 ctr = ball.center();
  AnalyticField V;
  V.value = [R, ctr](const Vec3& p) {
    return (R * R - (p - ctr).squaredNorm()) / (2.0 * R);
  };
  V.grad = [R, ctr](const Vec3& p) { return Vec3(-(p - ctr) / R); };
  V.hess = [R](const Vec3&) { return Eigen::Matrix3d(-Eigen::Matrix3d::Identity() / R); };
  return V;
}

/// Quadratic level-set weight V = 1 - sum ((x_i - c_i)/a_i)^2; positive
/// inside, vanishes on the boundary of any analytic shape.
inline AnalyticField level_weight(const ShapeSpec& shape) {
  shape.require_analytic();
  const int d = shape.dim();
  std::array<double, 3> inv2{};
  for (int i = 0; i < d; ++i) inv2[i] = 1.0 / (shape.axis(i) * shape.axis(i));
  const Vec3 ctr = shape.center();
  AnalyticField V;
  V.value = [=](const Vec3& p) {
    double s = 1.0;
    for (int i = 0; i < d; ++i) s -= (p[i] - ctr[i]) * (p[i] - ctr[i]) * inv2[i];
    return s;
  };
  V.grad = [=](const Vec3& p) {
    Vec3 g = Vec3::Zero();
    for (int i = 0; i < d; ++i) g[i] = -2.0 * (p[i] - ctr[i]) * inv2[i];
    return g;
  };
  V.hess = [=](const Vec3&) {
    Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
    for (int i = 0; i < d; ++i) H(i, i) = -2.0 * inv2[i];
    return H;
  };
  return V;
}

// ---------------------------------------------------------------------------
// Exact-geometry quadrature on 2D analytic shapes
// ---------------------------------------------------------------------------

namespace detail {

inline double boundary_parameter(const ShapeSpec& shape, const Vec3& p) {
  return std::atan2((p[1] - shape.center()[1]) / shape.axis(1),
                    (p[0] - shape.center()[0]) / shape.axis(0));
}

inline Vec3 boundary_point(const ShapeSpec& shape, double th) {
  return shape.center() +
         Vec3(shape.axis(0) * std::cos(th), shape.axis(1) * std::sin(th), 0.0);
}

inline Vec3 boundary_tangent(const ShapeSpec& shape, double th) {
  return Vec3(-shape.axis(0) * std::sin(th), shape.axis(1) * std::cos(th), 0.0);
}

/// Integrate over the exact domain: straight cells by a degree-4 triangle
/// rule plus, per boundary facet, the curved lens between the chord and the
/// exact boundary arc by a tensor Gauss rule on a blended map.
template <class F>
double integrate_volume_exact(const SimplicialMesh& m, F&& integrand) {
  if (m.dim != 2 || !m.shape)
    throw ContractError("identity quadrature: needs a 2D mesh of an analytic shape");
  const ShapeSpec& shape = *m.shape;
  double total = 0.0;
  for (int c = 0; c < m.n_cells(); ++c) {
    const double vol = cell_volume(m, c);
    const Vec3 p0 = m.vertices[m.cells[c][0]], p1 = m.vertices[m.cells[c][1]],
               p2 = m.vertices[m.cells[c][2]];
    double acc = 0.0;
    for (int q = 0; q < quad::TriangleDeg4::n; ++q) {
      const auto& b = quad::TriangleDeg4::bary[q];
      acc += quad::TriangleDeg4::w[q] * integrand(b[0] * p0 + b[1] * p1 + b[2] * p2);
    }
    total += vol * acc;
  }
  for (int f = 0; f < m.n_bfacets(); ++f) {
    const Vec3 v0 = m.vertices[m.bfacets[f][0]], v1 = m.vertices[m.bfacets[f][1]];
    const double th0 = boundary_parameter(shape, v0);
    double th1 = boundary_parameter(shape, v1);
    if (th1 - th0 > M_PI) th1 -= 2.0 * M_PI;
    if (th0 - th1 > M_PI) th1 += 2.0 * M_PI;
    const double dth = th1 - th0;
    for (int qt = 0; qt < quad::Gauss1D::n; ++qt) {
      const double t = quad::Gauss1D::x[qt];
      const double th = th0 + t * dth;
      const Vec3 arc = boundary_point(shape, th);
      const Vec3 darc = boundary_tangent(shape, th) * dth;
      const Vec3 chord = v0 + t * (v1 - v0);
      const Vec3 dchord = v1 - v0;
      for (int qs = 0; qs < quad::Gauss1D::n; ++qs) {
        const double s = quad::Gauss1D::x[qs];
        const Vec3 pos = chord + s * (arc - chord);
        const Vec3 dt_pos = (1.0 - s) * dchord + s * darc;
        const Vec3 ds_pos = arc - chord;
        // Orientation of the blended map depends on the facet winding; the
        // lens always adds area, so take the unsigned Jacobian.
        const double jac = std::abs(dt_pos[0] * ds_pos[1] - dt_pos[1] * ds_pos[0]);
        total += quad::Gauss1D::w[qt] * quad::Gauss1D::w[qs] * integrand(pos) * jac;
      }
    }
  }
  return total;
}

/// Integrate over the exact curved boundary, facet by facet.
template <class F>
double integrate_boundary_exact(const SimplicialMesh& m, F&& integrand) {
  if (m.dim != 2 || !m.shape)
    throw ContractError("identity quadrature: needs a 2D mesh of an analytic shape");
  const ShapeSpec& shape = *m.shape;
  double total = 0.0;
  for (int f = 0; f < m.n_bfacets(); ++f) {
    const Vec3 v0 = m.vertices[m.bfacets[f][0]], v1 = m.vertices[m.bfacets[f][1]];
    const double th0 = boundary_parameter(shape, v0);
    double th1 = boundary_parameter(shape, v1);
    if (th1 - th0 > M_PI) th1 -= 2.0 * M_PI;
    if (th0 - th1 > M_PI) th1 += 2.0 * M_PI;
    const double dth = th1 - th0;
    for (int q = 0; q < quad::Gauss1D::n; ++q) {
      const double th = th0 + quad::Gauss1D::x[q] * dth;
      const Vec3 p = boundary_point(shape, th);
      const double speed = boundary_tangent(shape, th).norm() * std::abs(dth);
      total += quad::Gauss1D::w[q] * integrand(p) * speed;
    }
  }
  return total;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Integral identities
// ---------------------------------------------------------------------------

struct IdentityTerms {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // lhs - rhs
  std::map<std::string, double> terms;
};

/// Both sides of the weighted Reilly formula for closed-form f and V on a 2D
/// analytic shape (flat metric, Ric = 0):
///   int_Om V((Df)^2 - |D2 f|^2)
///     = int_Sg V[2 f_nu Lap_Sg f + H f_nu^2 + h(grad_Sg f, grad_Sg f)]
///       + int_Sg V_nu |grad_Sg f|^2 + int_Om (D2 V - (Lap V) g)(grad f, grad f).
inline IdentityTerms reilly_residual(const SimplicialMesh& m, const AnalyticField& f,
                                     const AnalyticField& V) {
  if (!f.value || !f.grad || !f.hess || !V.value || !V.grad || !V.hess)
    throw ContractError("reilly_residual: fields must supply value/grad/hess");
  const ShapeSpec& shape = *m.shape;
  const int d = m.dim;

  IdentityTerms out;
  out.lhs = detail::integrate_volume_exact(m, [&](const Vec3& p) {
    const Eigen::Matrix3d H = f.hess(p);
    const double lap = H.topLeftCorner(d, d).trace();
    const double frob2 = H.topLeftCorner(d, d).squaredNorm();
    return V.value(p) * (lap * lap - frob2);
  });

  const double t_curv = detail::integrate_boundary_exact(m, [&](const Vec3& p) {
    const Vec3 nu = boundary_normal(shape, p);
    const Vec3 gf = f.grad(p);
    const Eigen::Matrix3d Hf = f.hess(p);
    const double fn = gf.dot(nu);
    const Vec3 gs = gf - fn * nu;
    const double Hmean = mean_curvature(shape, p);
    const double lap = Hf.topLeftCorner(d, d).trace();
    const double lap_sigma = lap - nu.dot(Hf * nu) - Hmean * fn;
    const Eigen::Matrix3d W = second_fundamental_form(shape, p);
    return V.value(p) *
           (2.0 * fn * lap_sigma + Hmean * fn * fn + gs.dot(W * gs));
  });
  const double t_nuV = detail::integrate_boundary_exact(m, [&](const Vec3& p) {
    const Vec3 nu = boundary_normal(shape, p);
    const Vec3 gf = f.grad(p);
    const Vec3 gs = gf - gf.dot(nu) * nu;
    return V.grad(p).dot(nu) * gs.squaredNorm();
  });
  const double t_vol = detail::integrate_volume_exact(m, [&](const Vec3& p) {
    const Eigen::Matrix3d Hv = V.hess(p);
    const double lapV = Hv.topLeftCorner(d, d).trace();
    const Vec3 gf = f.grad(p);
    return gf.dot(Hv * gf) - lapV * gf.squaredNorm();
  });

  out.terms["boundary_curvature"] = t_curv;
  out.terms["boundary_normal_weight"] = t_nuV;
  out.terms["volume_weight_hessian"] = t_vol;
  out.rhs = t_curv + t_nuV + t_vol;
  out.residual = out.lhs - out.rhs;
  return out;
}

/// Both sides of the Pohozaev identity with X = grad V for a closed-form
/// harmonic f:
///   int_Om (<D_{grad f} X, grad f> - |grad f|^2 div X / 2)
///     = int_Sg (f_nu <X, grad f> - |grad f|^2 <X, nu> / 2).
inline IdentityTerms pohozaev_residual(const SimplicialMesh& m, const AnalyticField& f,
                                       const AnalyticField& V) {
  if (!f.value || !f.grad || !f.hess || !V.grad || !V.hess)
    throw ContractError("pohozaev_residual: fields must supply derivatives");
  const ShapeSpec& shape = *m.shape;
  const int d = m.dim;

  // Harmonicity is a precondition; spot check it.
  {
    const Vec3 probe = shape.center() + 0.31 * Vec3(shape.axis(0), shape.axis(1), 0.0);
    const double lap = f.hess(probe).topLeftCorner(d, d).trace();
    if (std::abs(lap) > 1e-10)
      throw ContractError("pohozaev_residual: f must be harmonic");
  }

  IdentityTerms out;
  out.lhs = detail::integrate_volume_exact(m, [&](const Vec3& p) {
    const Vec3 gf = f.grad(p);
    const Eigen::Matrix3d Hv = V.hess(p);
    const double divX = Hv.topLeftCorner(d, d).trace();
    return gf.dot(Hv * gf) - 0.5 * gf.squaredNorm() * divX;
  });
  out.rhs = detail::integrate_boundary_exact(m, [&](const Vec3& p) {
    const Vec3 nu = boundary_normal(shape, p);
    const Vec3 gf = f.grad(p);
    const Vec3 X = V.grad(p);
    return gf.dot(nu) * X.dot(gf) - 0.5 * gf.squaredNorm() * X.dot(nu);
  });
  out.terms["volume"] = out.lhs;
  out.terms["boundary"] = out.rhs;
  out.residual = out.lhs - out.rhs;
  return out;
}

// ---------------------------------------------------------------------------
// Key inequalities at the discrete level
// ---------------------------------------------------------------------------

struct InequalityMargins {
  double margin1 = 0.0;      // int (d_nu f)^2 - c int |grad f|^2
  double margin2 = 0.0;      // int |grad_Sg f|^2 - (n-1)c int |grad f|^2
  double rel_margin1 = 0.0;  // margins divided by the Dirichlet energy
  double rel_margin2 = 0.0;
};

inline InequalityMargins key_inequality_margins(const FemSystem& fs, double c,
                                                const Eigen::VectorXd& boundary_data) {
  const Eigen::VectorXd u = fs.harmonic_extension(boundary_data);
  const Functionals F = fs.functionals(u);
  const double scale =
      boundary_data.cwiseAbs().maxCoeff() * boundary_data.cwiseAbs().maxCoeff();
  if (F.dirichlet_energy <= 1e-10 * std::max(scale, 1e-300))
    throw DomainError("key_inequality_margins: boundary data is constant");
  InequalityMargins out;
  const int n = fs.mesh().dim;
  out.margin1 = F.normal_derivative_l2 - c * F.dirichlet_energy;
  out.margin2 = F.tangential_gradient_l2 - (n - 1) * c * F.dirichlet_energy;
  out.rel_margin1 = out.margin1 / F.dirichlet_energy;
  out.rel_margin2 = out.margin2 / F.dirichlet_energy;
  return out;
}

// ---------------------------------------------------------------------------
// Hessian comparison sweep
// ---------------------------------------------------------------------------

struct HessianCheck {
  double max_violation = -std::numeric_limits<double>::infinity();
  int samples_kept = 0;
  int samples_excluded = 0;
};

namespace detail {

inline double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * (index % base);
    index /= base;
  }
  return r;
}

}  // namespace detail

/// Finite-difference check of the comparison hess(V o rho) <= -c g away from
/// the cut locus. Quasi-random interior samples; the second differences are
/// accumulated in extended precision (double roundoff at the pinned step
/// would drown the 1e-6 ball tolerance).
inline HessianCheck hessian_comparison_check(const ShapeSpec& shape, double c,
                                             int sample_count, double band = 0.05) {
  shape.require_analytic();
  const int d = shape.dim();
  const double step = std::cbrt(DBL_EPSILON) * shape.diameter();

  auto W = [&](const Vec3& q) -> long double {
    const std::array<long double, 3> p{static_cast<long double>(q[0]),
                                       static_cast<long double>(q[1]),
                                       static_cast<long double>(q[2])};
    const long double rho = distance_to_boundary_ld(shape, p);
    return rho - static_cast<long double>(c) / 2.0L * rho * rho;
  };

  HessianCheck out;
  const int bases[3] = {2, 3, 5};
  int draw = 0;
  const int max_draw = 200 * std::max(sample_count, 1) + 1000;
  while (out.samples_kept < sample_count && draw < max_draw) {
    ++draw;
    Vec3 x = shape.center();
    for (int i = 0; i < d; ++i)
      x[i] += shape.axis(i) * (2.0 * detail::halton(draw, bases[i]) - 1.0);
    if (shape.level(x) >= 1.0) continue;
    const auto pr = signed_projection(shape, x);
    if (pr.rho < 3.0 * step) continue;  // FD stencil must stay inside
    if (pr.degenerate || projection_spread(shape, x, band) > 3.0 * band) {
      ++out.samples_excluded;
      continue;
    }

    Eigen::MatrixXd H(d, d);
    const long double h = static_cast<long double>(step);
    const long double w0 = W(x);
    for (int i = 0; i < d; ++i) {
      Vec3 xp = x, xm = x;
      xp[i] += step;
      xm[i] -= step;
      H(i, i) = static_cast<double>((W(xp) - 2.0L * w0 + W(xm)) / (h * h));
      for (int j = i + 1; j < d; ++j) {
        Vec3 pp = x, pm = x, mp = x, mm = x;
        pp[i] += step; pp[j] += step;
        pm[i] += step; pm[j] -= step;
        mp[i] -= step; mp[j] += step;
        mm[i] -= step; mm[j] -= step;
        const double v =
            static_cast<double>((W(pp) - W(pm) - W(mp) + W(mm)) / (4.0L * h * h));
        H(i, j) = v;
        H(j, i) = v;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H +
                                                      c * Eigen::MatrixXd::Identity(d, d));
    out.max_violation = std::max(out.max_violation, es.eigenvalues().maxCoeff());
    ++out.samples_kept;
  }
  if (out.samples_kept == 0)
    throw NumericalError("hessian_comparison_check: all samples excluded");
  return out;
}

}  // namespace steklov
