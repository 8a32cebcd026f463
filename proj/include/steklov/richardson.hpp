#pragma once

#include <cmath>
#include <vector>

#include "steklov/errors.hpp"

namespace steklov {

struct RichardsonResult {
  double extrapolated = 0.0;
  double empirical_order = 0.0;
  bool reliable = false;  // false: non-monotone differences, finest raw value returned
};

/// Extrapolate a ladder of computed values v(h) = L + C h^p + o(h^p) to
/// h -> 0. `hs` strictly decreasing, matched to `values`; the last three
/// points determine p (solved even for non-uniform ratios) and L.
inline RichardsonResult richardson(const std::vector<double>& hs,
                                   const std::vector<double>& values) {
  if (hs.size() != values.size())
    throw ContractError("richardson: ladder and value arrays must match");
  if (hs.size() < 3) throw ContractError("richardson: need at least 3 ladder points");
  for (size_t i = 1; i < hs.size(); ++i)
    if (!(hs[i] < hs[i - 1]))
      throw ContractError("richardson: ladder must be strictly decreasing");

  const size_t n = hs.size();
  const double h1 = hs[n - 3], h2 = hs[n - 2], h3 = hs[n - 1];
  const double d1 = values[n - 2] - values[n - 3];
  const double d2 = values[n - 1] - values[n - 2];

  RichardsonResult out;
  const double scale = std::abs(values[n - 1]) + 1e-300;
  // Same-sign, shrinking differences are the signature of v = L + C h^p.
  if (d1 * d2 <= 0.0 || std::abs(d2) >= std::abs(d1) ||
      std::abs(d1) < 1e-15 * scale) {
    out.extrapolated = values[n - 1];
    out.empirical_order = 0.0;
    out.reliable = false;
    return out;
  }

  // Solve d1/d2 = (h2^p - h1^p)/(h3^p - h2^p) for p by bisection; the right
  // side's magnitude is monotone in p for a decreasing ladder.
  const double target = d1 / d2;
  auto ratio = [&](double p) {
    return (std::pow(h2, p) - std::pow(h1, p)) / (std::pow(h3, p) - std::pow(h2, p));
  };
  double lo = 0.05, hi = 10.0;
  if ((ratio(lo) - target) * (ratio(hi) - target) > 0.0) {
    out.extrapolated = values[n - 1];
    out.empirical_order = 0.0;
    out.reliable = false;
    return out;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((ratio(mid) - target) * (ratio(lo) - target) <= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  const double p = 0.5 * (lo + hi);
  const double C = d2 / (std::pow(h3, p) - std::pow(h2, p));
  out.extrapolated = values[n - 1] - C * std::pow(h3, p);
  out.empirical_order = p;
  out.reliable = true;
  return out;
}

}  // namespace steklov
