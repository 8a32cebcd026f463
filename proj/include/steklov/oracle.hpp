#pragma once

#include <boost/numeric/odeint.hpp>
#include <array>
#include <cmath>
#include <vector>

#include "steklov/errors.hpp"
#include "steklov/shape.hpp"

namespace steklov {

// ---------------------------------------------------------------------------
// Closed-form ball spectra
// ---------------------------------------------------------------------------

/// First `count` Steklov eigenvalues of Ball(R) in R^n, ascending with
/// multiplicities: sigma_m = m/R repeated dim of the degree-m spherical
/// harmonics (2 for n=2, 2m+1 for n=3), starting from sigma_0 = 0.
inline std::vector<double> ball_steklov(int n, double R, int count) {
  if (n != 2 && n != 3) throw ContractError("ball_steklov: n must be 2 or 3");
  if (!(R > 0.0)) throw ContractError("ball_steklov: R must be positive");
  if (count < 0) throw ContractError("ball_steklov: count must be nonnegative");
  std::vector<double> out;
  out.reserve(count);
  for (int m = 0; static_cast<int>(out.size()) < count; ++m) {
    const int mult = m == 0 ? 1 : (n == 2 ? 2 : 2 * m + 1);
    for (int r = 0; r < mult && static_cast<int>(out.size()) < count; ++r)
      out.push_back(m / R);
  }
  return out;
}

/// First `count` Laplace-Beltrami eigenvalues of the boundary sphere of
/// Ball(R) in R^n: lambda_m = m(m + n - 2)/R^2 with the same multiplicities.
inline std::vector<double> sphere_laplacian(int n, double R, int count) {
  if (n != 2 && n != 3) throw ContractError("sphere_laplacian: n must be 2 or 3");
  if (!(R > 0.0)) throw ContractError("sphere_laplacian: R must be positive");
  if (count < 0) throw ContractError("sphere_laplacian: count must be nonnegative");
  std::vector<double> out;
  out.reserve(count);
  for (int m = 0; static_cast<int>(out.size()) < count; ++m) {
    const int mult = m == 0 ? 1 : (n == 2 ? 2 : 2 * m + 1);
    for (int r = 0; r < mult && static_cast<int>(out.size()) < count; ++r)
      out.push_back(m * (m + n - 2) / (R * R));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Upper-bound formulas
// ---------------------------------------------------------------------------

/// sigma_j <= lambda_j / ((n-1)c).
inline double thm2_upper(double lambda, int n, double c) {
  if (lambda < 0.0) throw ContractError("thm2_upper: lambda must be nonnegative");
  if (n < 2) throw ContractError("thm2_upper: n must be at least 2");
  if (!(c > 0.0)) throw ContractError("thm2_upper: c must be positive");
  return lambda / ((n - 1) * c);
}

/// sigma_1 <= (sqrt(lambda_1)/((n-1)c)) (sqrt(lambda_1) + sqrt(lambda_1 - (n-1)c^2)).
inline double wang_xia_upper(double lambda1, int n, double c) {
  if (n < 2) throw ContractError("wang_xia_upper: n must be at least 2");
  if (!(c > 0.0)) throw ContractError("wang_xia_upper: c must be positive");
  if (lambda1 < 0.0) throw ContractError("wang_xia_upper: lambda1 must be nonnegative");
  double rad = lambda1 - (n - 1) * c * c;
  if (rad < -1e-12)
    throw DomainError("wang_xia_upper: lambda1 < (n-1)c^2 violates the hypothesis");
  rad = std::max(rad, 0.0);
  const double s = std::sqrt(lambda1);
  return s / ((n - 1) * c) * (s + std::sqrt(rad));
}

/// Bound bundle for one (n, c, lambda list) input.
struct BoundRecord {
  int n = 2;
  double c = 1.0;
  std::vector<double> lambda;
  std::vector<double> thm2;  // lambda_j / ((n-1)c) per entry
  double wang_xia = 0.0;     // from lambda[0] (the first nonzero eigenvalue)
  bool wang_xia_valid = false;
};

inline BoundRecord make_bound_record(int n, double c, std::vector<double> lambda) {
  if (lambda.empty()) throw ContractError("make_bound_record: need lambda values");
  BoundRecord rec;
  rec.n = n;
  rec.c = c;
  rec.lambda = std::move(lambda);
  for (double l : rec.lambda) rec.thm2.push_back(thm2_upper(l, n, c));
  rec.wang_xia_valid = rec.lambda[0] >= (n - 1) * c * c - 1e-12;
  if (rec.wang_xia_valid) rec.wang_xia = wang_xia_upper(rec.lambda[0], n, c);
  return rec;
}

// ---------------------------------------------------------------------------
// Rotationally symmetric shooting oracle
// ---------------------------------------------------------------------------

namespace detail {

/// Clamped-left natural-right cubic spline through the profile samples,
/// with s'(r_0) = 1 enforced (the metric regularity condition f'(0) = 1).
class ProfileSpline {
 public:
  explicit ProfileSpline(const RotSymProfile& p) : r_(p.r), y_(p.f) {
    const int n = static_cast<int>(r_.size());
    // Solve the standard tridiagonal system for the spline derivatives m_i:
    // clamped m_0 = 1 at the left end, natural (s'' = 0) at the right end.
    std::vector<double> a(n, 0.0), b(n, 0.0), cu(n, 0.0), d(n, 0.0);
    b[0] = 1.0;
    d[0] = 1.0;
    for (int i = 1; i < n - 1; ++i) {
      const double hl = r_[i] - r_[i - 1], hr = r_[i + 1] - r_[i];
      a[i] = 1.0 / hl;
      b[i] = 2.0 * (1.0 / hl + 1.0 / hr);
      cu[i] = 1.0 / hr;
      d[i] = 3.0 * ((y_[i] - y_[i - 1]) / (hl * hl) + (y_[i + 1] - y_[i]) / (hr * hr));
    }
    {
      const double h = r_[n - 1] - r_[n - 2];
      a[n - 1] = 1.0 / h;
      b[n - 1] = 2.0 / h;
      d[n - 1] = 3.0 * (y_[n - 1] - y_[n - 2]) / (h * h);
    }
    m_.assign(n, 0.0);
    for (int i = 1; i < n; ++i) {
      const double w = a[i] / b[i - 1];
      b[i] -= w * cu[i - 1];
      d[i] -= w * d[i - 1];
    }
    m_[n - 1] = d[n - 1] / b[n - 1];
    for (int i = n - 2; i >= 0; --i) m_[i] = (d[i] - cu[i] * m_[i + 1]) / b[i];
  }

  double value(double r) const { return eval(r).first; }
  double deriv(double r) const { return eval(r).second; }

  /// Third derivative on the first interval (constant there); sets the
  /// series-start curvature coefficient.
  double third_derivative_at_zero() const {
    const double h = r_[1] - r_[0];
    const double t = (y_[1] - y_[0]) / h;
    // Hermite cubic coefficients on [r0, r1].
    const double c2 = (3.0 * t - 2.0 * m_[0] - m_[1]) / h;
    const double c3 = (m_[0] + m_[1] - 2.0 * t) / (h * h);
    (void)c2;
    return 6.0 * c3;
  }

 private:
  std::pair<double, double> eval(double r) const {
    const int n = static_cast<int>(r_.size());
    int i = static_cast<int>(std::upper_bound(r_.begin(), r_.end(), r) - r_.begin()) - 1;
    i = std::clamp(i, 0, n - 2);
    const double h = r_[i + 1] - r_[i];
    const double t = (y_[i + 1] - y_[i]) / h;
    const double c2 = (3.0 * t - 2.0 * m_[i] - m_[i + 1]) / h;
    const double c3 = (m_[i] + m_[i + 1] - 2.0 * t) / (h * h);
    const double x = r - r_[i];
    return {y_[i] + m_[i] * x + c2 * x * x + c3 * x * x * x,
            m_[i] + 2.0 * c2 * x + 3.0 * c3 * x * x};
  }

  std::vector<double> r_, y_, m_;
};

}  // namespace detail

/// Flat profile f(r) = r on [0, R] (Euclidean disk of radius R).
inline RotSymProfile flat_profile(double R, int samples = 64) {
  if (!(R > 0.0)) throw ContractError("flat_profile: R must be positive");
  if (samples < 4) throw ContractError("flat_profile: need at least 4 samples");
  RotSymProfile p;
  p.R = R;
  for (int i = 0; i < samples; ++i) {
    const double r = R * i / (samples - 1);
    p.r.push_back(r);
    p.f.push_back(r);
  }
  return p;
}

/// Spherical-cap profile f(r) = sin(r) on [0, R], R < pi (unit round sphere).
inline RotSymProfile spherical_cap_profile(double R, int samples = 256) {
  if (!(R > 0.0 && R < M_PI))
    throw ContractError("spherical_cap_profile: need 0 < R < pi");
  if (samples < 4) throw ContractError("spherical_cap_profile: need at least 4 samples");
  RotSymProfile p;
  p.R = R;
  for (int i = 0; i < samples; ++i) {
    const double r = R * i / (samples - 1);
    p.r.push_back(r);
    p.f.push_back(i == 0 ? 0.0 : std::sin(r));
  }
  return p;
}

/// Steklov eigenvalue of angular mode l >= 1 on the warped 2D metric
/// dr^2 + f(r)^2 dtheta^2: shoot (f u')' = (l^2 / f) u from a series start
/// u = r^l (1 + a r^2) at r0 = 1e-4 R and return u'(R)/u(R).
inline double rotsym_steklov(const RotSymProfile& profile, int l) {
  if (l < 1) throw ContractError("rotsym_steklov: mode l must be at least 1");
  const ShapeSpec checked = ShapeSpec::rotsym(profile);  // validates the profile
  const detail::ProfileSpline spline(checked.profile());
  const double R = profile.R;
  const double r0 = 1e-4 * R;

  // f = r + b r^3 + O(r^5) near 0 gives u = r^l (1 + a r^2 + ...) with
  // a = -(l/2) b from matching the O(r^{l+1}) terms of the ODE.
  const double b = spline.third_derivative_at_zero() / 6.0;
  const double a = -0.5 * l * b;

  using State = std::array<double, 2>;  // (u, v) with v = f u'
  State y;
  y[0] = std::pow(r0, l) * (1.0 + a * r0 * r0);
  const double up0 = l * std::pow(r0, l - 1) + (l + 2) * a * std::pow(r0, l + 1);
  y[1] = spline.value(r0) * up0;
  // The ODE is linear; normalize so the controller's absolute tolerance is
  // meaningful from the start (u(r0) = r0^l underflows it for large l).
  y[1] /= y[0];
  y[0] = 1.0;

  auto rhs = [&](const State& s, State& ds, double r) {
    const double f = spline.value(r);
    if (!(f > 0.0)) throw NumericalError("rotsym_steklov: profile not positive");
    ds[0] = s[1] / f;
    ds[1] = l * l / f * s[0];
  };

  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_controlled<ode::runge_kutta_cash_karp54<State>>(1e-13, 1e-13);
  ode::integrate_adaptive(stepper, rhs, y, r0, R, (R - r0) / 1024.0);

  if (!std::isfinite(y[0]) || !std::isfinite(y[1]))
    throw NumericalError("rotsym_steklov: integration blew up");
  if (y[0] == 0.0) throw NumericalError("rotsym_steklov: u(R) = 0");
  return y[1] / (spline.value(R) * y[0]);
}

}  // namespace steklov
