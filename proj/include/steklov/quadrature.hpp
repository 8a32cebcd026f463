#pragma once

#include <array>

namespace steklov::quad {

/// 5-point Gauss-Legendre rule on [0, 1] (exact to degree 9).
struct Gauss1D {
  static constexpr int n = 5;
  static constexpr std::array<double, 5> x = {
      0.046910077030668, 0.230765344947158, 0.5, 0.769234655052841, 0.953089922969332};
  static constexpr std::array<double, 5> w = {
      0.118463442528095, 0.239314335249683, 0.284444444444444, 0.239314335249683,
      0.118463442528095};
};

/// Dunavant 6-point triangle rule, exact to degree 4. Barycentric nodes,
/// weights normalized to sum to 1 (multiply by the triangle area).
struct TriangleDeg4 {
  static constexpr int n = 6;
  static constexpr std::array<std::array<double, 3>, 6> bary = {{
      {0.108103018168070, 0.445948490915965, 0.445948490915965},
      {0.445948490915965, 0.108103018168070, 0.445948490915965},
      {0.445948490915965, 0.445948490915965, 0.108103018168070},
      {0.816847572980459, 0.091576213509771, 0.091576213509771},
      {0.091576213509771, 0.816847572980459, 0.091576213509771},
      {0.091576213509771, 0.091576213509771, 0.816847572980459},
  }};
  static constexpr std::array<double, 6> w = {
      0.223381589678011, 0.223381589678011, 0.223381589678011,
      0.109951743655322, 0.109951743655322, 0.109951743655322};
};

}  // namespace steklov::quad
