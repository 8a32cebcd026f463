#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "steklov/distance_field.hpp"
#include "steklov/mesh.hpp"
#include "steklov/shape.hpp"

using namespace steklov;
using Catch::Approx;

TEST_CASE("ShapeSpec factory invariants") {
  CHECK_THROWS_AS(ShapeSpec::ball(4, 1.0), ContractError);
  CHECK_THROWS_AS(ShapeSpec::ball(2, 0.0), ContractError);
  CHECK_THROWS_AS(ShapeSpec::ball(2, -1.0), ContractError);
  CHECK_THROWS_AS(ShapeSpec::ellipsoid({1.0, 2.0}), ContractError);  // not descending
  CHECK_THROWS_AS(ShapeSpec::ellipsoid({2.0, 0.0}), ContractError);
  CHECK_THROWS_AS(ShapeSpec::ellipsoid({1.0}), ContractError);

  RotSymProfile bad;
  bad.R = 1.0;
  bad.r = {0.0, 0.5, 1.0};
  bad.f = {0.0, 0.5, 1.0};
  CHECK_THROWS_AS(ShapeSpec::rotsym(bad), ContractError);  // too few samples

  const auto ball = ShapeSpec::ball(2, 2.0);
  CHECK(ball.radius() == 2.0);
  CHECK(ball.diameter() == 4.0);
  const auto rs = ShapeSpec::rotsym(RotSymProfile{1.0, {0, 0.25, 0.5, 0.75, 1.0},
                                                  {0, 0.25, 0.5, 0.75, 1.0}});
  CHECK_THROWS_AS(rs.level(Vec3::Zero()), UnsupportedShapeError);
  CHECK_THROWS_AS(min_principal_curvature(rs), UnsupportedShapeError);
}

TEST_CASE("min principal curvature closed forms") {
  CHECK(min_principal_curvature(ShapeSpec::ball(2, 2.0)) == Approx(0.5));
  CHECK(min_principal_curvature(ShapeSpec::ball(3, 1.0)) == Approx(1.0));
  // b/a^2 at the minor-axis endpoints.
  CHECK(min_principal_curvature(ShapeSpec::ellipsoid({2.0, 1.0})) ==
        Approx(0.25).epsilon(1e-10));
  // a_n / a_1^2.
  CHECK(min_principal_curvature(ShapeSpec::ellipsoid({2.0, 1.5, 1.0})) ==
        Approx(0.25).epsilon(1e-10));
  CHECK(min_principal_curvature(ShapeSpec::ellipsoid({1.5, 1.2, 1.0})) ==
        Approx(1.0 / 2.25).epsilon(1e-10));
  // Ellipsoid with equal axes matches the ball.
  CHECK(min_principal_curvature(ShapeSpec::ellipsoid({1.7, 1.7})) ==
        Approx(1.0 / 1.7).epsilon(1e-12));
}

TEST_CASE("principal curvatures at ellipse axis endpoints") {
  const auto e = ShapeSpec::ellipsoid({2.0, 1.0});
  // Curvature a/b^2 at the major-axis endpoint, b/a^2 at the minor-axis one.
  CHECK(principal_curvatures(e, Vec3(2, 0, 0))[0] == Approx(2.0));
  CHECK(principal_curvatures(e, Vec3(0, 1, 0))[0] == Approx(0.25));
  // kappa(theta) = ab / (a^2 sin^2 + b^2 cos^2)^{3/2} along the boundary.
  const double a = 2.0, b = 1.0;
  for (double th : {0.3, 1.0, 2.2}) {
    const Vec3 p(a * std::cos(th), b * std::sin(th), 0.0);
    const double expect =
        a * b / std::pow(a * a * std::sin(th) * std::sin(th) +
                             b * b * std::cos(th) * std::cos(th),
                         1.5);
    CHECK(principal_curvatures(e, p)[0] == Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("boundary normal and second fundamental form") {
  const auto ball = ShapeSpec::ball(3, 2.0);
  const Vec3 p = 2.0 * Vec3(1, 2, 2).normalized();
  const Vec3 nu = boundary_normal(ball, p);
  CHECK((nu - p / 2.0).norm() < 1e-12);
  // On a sphere h(u, u) = |u|^2 / R for tangent u.
  const Eigen::Matrix3d W = second_fundamental_form(ball, p);
  Vec3 t = nu.cross(Vec3(0, 0, 1)).normalized();
  CHECK(t.dot(W * t) == Approx(0.5).epsilon(1e-10));
  CHECK(mean_curvature(ball, p) == Approx(1.0).epsilon(1e-10));
}

namespace {
double brute_force_ellipse_distance(double a, double b, const Vec3& x) {
  double best = std::numeric_limits<double>::infinity();
  const int N = 4000000;
  for (int i = 0; i < N; ++i) {
    const double th = 2.0 * M_PI * i / N;
    const Vec3 p(a * std::cos(th), b * std::sin(th), 0.0);
    best = std::min(best, (p - x).norm());
  }
  return best;
}
}  // namespace

TEST_CASE("signed projection on balls") {
  const auto ball = ShapeSpec::ball(2, 2.0);
  const auto pr = signed_projection(ball, Vec3(0.3, 0.4, 0.0));
  CHECK(pr.rho == Approx(1.5).epsilon(1e-14));
  CHECK(pr.foot.norm() == Approx(2.0).epsilon(1e-14));
  CHECK_FALSE(pr.degenerate);

  const auto ctr = signed_projection(ball, Vec3::Zero());
  CHECK(ctr.rho == Approx(2.0));
  CHECK(ctr.degenerate);
  CHECK(ctr.normal.norm() == Approx(1.0));

  CHECK_THROWS_AS(signed_projection(ball, Vec3(3.0, 0, 0)), DomainError);
}

TEST_CASE("signed projection on the ellipse matches brute force") {
  const auto e = ShapeSpec::ellipsoid({2.0, 1.0});
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  int tested = 0;
  while (tested < 30) {
    const Vec3 x(2.0 * U(rng), U(rng), 0.0);
    if (e.level(x) >= 0.98) continue;
    ++tested;
    const auto pr = signed_projection(e, x);
    const double ref = brute_force_ellipse_distance(2.0, 1.0, x);
    CHECK(pr.rho == Approx(ref).margin(1e-6));
    // Foot on the level set; point-to-foot parallel to the normal.
    CHECK(std::abs(e.level(pr.foot) - 1.0) < 1e-10);
    if (pr.rho > 1e-6) {
      const Vec3 dir = (pr.foot - x).normalized();
      CHECK((dir - pr.normal).norm() < 1e-6);
    }
  }

  // Interior point on the minor axis of symmetry.
  const auto c = signed_projection(e, Vec3(0, 0, 0));
  CHECK(c.rho == Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(c.foot[1]) == Approx(1.0).epsilon(1e-12));

  // On the major axis inside the evolute the foot leaves the axis.
  const auto cut = signed_projection(e, Vec3(0.8, 0.0, 0.0));
  CHECK(cut.rho == Approx(brute_force_ellipse_distance(2, 1, Vec3(0.8, 0, 0)))
                       .margin(1e-6));
  CHECK(std::abs(cut.foot[1]) > 0.1);
}

TEST_CASE("long double distance agrees with the double path") {
  const auto e = ShapeSpec::ellipsoid({2.0, 1.0});
  for (const Vec3& x :
       {Vec3(0.5, 0.3, 0), Vec3(-1.2, 0.4, 0), Vec3(0.1, -0.8, 0)}) {
    const double d = signed_projection(e, x).rho;
    const long double dl = distance_to_boundary_ld(e, {x[0], x[1], x[2]});
    CHECK(std::abs(d - static_cast<double>(dl)) < 1e-13);
  }
}

TEST_CASE("projection spread flags the cut locus") {
  const auto e = ShapeSpec::ellipsoid({2.0, 1.0});
  // Near the major axis inside the evolute, probe feet flip across the axis.
  CHECK(projection_spread(e, Vec3(0.5, 0.001, 0), 0.05) > 0.3);
  // Away from the axis, feet stay together.
  CHECK(projection_spread(e, Vec3(0.5, 0.5, 0), 0.05) < 0.3);
}

TEST_CASE("weight function") {
  CHECK(weight_V(0.0, 1.0) == 0.0);
  CHECK(weight_V(1.0, 1.0) == Approx(0.5));
  for (double c : {0.25, 0.5, 2.0}) CHECK(weight_V(1.0 / c, c) == Approx(0.5 / c));
  CHECK_THROWS_AS(weight_V(-0.1, 1.0), ContractError);
  // Positive with nonnegative slope on (0, 1/c].
  for (double rho = 0.05; rho <= 1.0 / 0.25; rho += 0.05) {
    CHECK(weight_V(rho, 0.25) > 0.0);
    CHECK(1.0 - 0.25 * rho >= 0.0);
  }
}

TEST_CASE("distance field on meshes") {
  const auto ball = ShapeSpec::ball(2, 1.0);
  const auto mesh = generate(ball, 0.1);
  const auto df = distance_field(ball, mesh);
  CHECK(df.rho_max == Approx(1.0).margin(1e-6));
  for (int v : mesh.boundary_vertices) CHECK(df.rho[v] == 0.0);
  for (int v = 0; v < mesh.n_vertices(); ++v) CHECK(df.rho[v] >= 0.0);

  const auto e = ShapeSpec::ellipsoid({2.0, 1.0});
  const auto em = generate(e, 0.1);
  const auto edf = distance_field(e, em);
  CHECK(edf.rho_max <= 4.0 + 1e-6);  // 1/c for c = 0.25
  CHECK(edf.rho_max <= 1.0 + 10.0 * em.h * em.h);
  // The cut locus (major-axis segment) must be flagged somewhere.
  int flagged = 0;
  for (char f : edf.near_cut) flagged += f;
  CHECK(flagged > 0);
}
