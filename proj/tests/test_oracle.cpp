#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "steklov/oracle.hpp"
#include "steklov/richardson.hpp"

using namespace steklov;
using Catch::Approx;

TEST_CASE("ball Steklov spectra with multiplicities") {
  CHECK(ball_steklov(2, 1.0, 7) == std::vector<double>{0, 1, 1, 2, 2, 3, 3});
  CHECK(ball_steklov(2, 2.0, 2)[1] == Approx(0.5));
  const auto s3 = ball_steklov(3, 1.0, 5);
  CHECK(s3 == std::vector<double>{0, 1, 1, 1, 2});
  CHECK_THROWS_AS(ball_steklov(4, 1.0, 3), ContractError);
  CHECK_THROWS_AS(ball_steklov(2, 0.0, 3), ContractError);
}

TEST_CASE("sphere Laplacian spectra") {
  CHECK(sphere_laplacian(2, 1.0, 5) == std::vector<double>{0, 1, 1, 4, 4});
  CHECK(sphere_laplacian(2, 2.0, 2)[1] == Approx(0.25));
  const auto l3 = sphere_laplacian(3, 1.0, 4);
  CHECK(l3[1] == Approx(2.0));
  CHECK(l3[2] == Approx(2.0));
  CHECK(l3[3] == Approx(2.0));
}

TEST_CASE("ball spectra cross-relation") {
  // lambda_m * R = sigma_m (sigma_m R + n - 2), exercised for m <= 6.
  for (int n : {2, 3})
    for (double R : {0.5, 1.0, 2.0}) {
      const int count = n == 2 ? 13 : 49;
      const auto sig = ball_steklov(n, R, count);
      const auto lam = sphere_laplacian(n, R, count);
      for (int i = 0; i < count; ++i)
        CHECK(lam[i] * R == Approx(sig[i] * (sig[i] * R + n - 2)).margin(1e-12));
    }
}

TEST_CASE("upper bound formulas") {
  CHECK(thm2_upper(2.0, 3, 1.0) == Approx(1.0));
  CHECK(wang_xia_upper(2.0, 3, 1.0) == Approx(1.0));
  CHECK(thm2_upper(4.0, 3, 1.0) == Approx(2.0));
  CHECK(wang_xia_upper(4.0, 3, 1.0) == Approx(2.0 + std::sqrt(2.0)));
  CHECK(thm2_upper(0.0, 2, 0.7) == 0.0);
  // Tiny negative radicand clamps; a real violation throws.
  CHECK(wang_xia_upper(2.0 - 1e-13, 3, 1.0) == Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(wang_xia_upper(1.0, 3, 1.0), DomainError);
  CHECK_THROWS_AS(thm2_upper(-1.0, 2, 1.0), ContractError);
}

TEST_CASE("thm2 bound dominated by Wang-Xia over random admissible inputs") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 2 + (rng() % 2);
    const double c = 0.05 + 3.0 * U(rng);
    const double lambda1 = (n - 1) * c * c * (1.0 + 5.0 * U(rng));
    CHECK(thm2_upper(lambda1, n, c) <= wang_xia_upper(lambda1, n, c) + 1e-12);
  }
}

TEST_CASE("bound record") {
  const auto rec = make_bound_record(3, 1.0, {2.0, 4.0});
  CHECK(rec.thm2[0] == Approx(1.0));
  CHECK(rec.thm2[1] == Approx(2.0));
  CHECK(rec.wang_xia_valid);
  CHECK(rec.wang_xia == Approx(1.0));
  const auto bad = make_bound_record(3, 1.0, {0.5});
  CHECK_FALSE(bad.wang_xia_valid);
}

TEST_CASE("flat profile shooting reproduces l / R") {
  for (double R : {0.5, 1.0, 2.0}) {
    const auto p = flat_profile(R);
    for (int l = 1; l <= 6; ++l)
      CHECK(rotsym_steklov(p, l) == Approx(l / R).epsilon(1e-8));
  }
}

TEST_CASE("spherical cap shooting") {
  // On the unit round cap of radius R, u = tan^l(r/2) solves the mode-l
  // equation, so sigma_l = l / sin(R).
  const double R = 1.2;
  const auto p = spherical_cap_profile(R);
  for (int l = 1; l <= 3; ++l)
    CHECK(rotsym_steklov(p, l) == Approx(l / std::sin(R)).epsilon(1e-5));
}

TEST_CASE("shooting rejects bad input") {
  CHECK_THROWS_AS(rotsym_steklov(flat_profile(1.0), 0), ContractError);
  RotSymProfile bad = flat_profile(1.0);
  bad.f[10] = -1.0;
  CHECK_THROWS_AS(rotsym_steklov(bad, 1), ContractError);
}

TEST_CASE("richardson extrapolation") {
  {
    std::vector<double> hs = {0.08, 0.04, 0.02}, vals;
    for (double h : hs) vals.push_back(1.0 + h * h);
    const auto r = richardson(hs, vals);
    CHECK(r.reliable);
    CHECK(r.extrapolated == Approx(1.0).margin(1e-10));
    CHECK(r.empirical_order == Approx(2.0).margin(1e-6));
  }
  {
    std::vector<double> hs = {0.08, 0.04, 0.02}, vals;
    for (double h : hs) vals.push_back(1.0 + h);
    const auto r = richardson(hs, vals);
    CHECK(r.reliable);
    CHECK(r.empirical_order == Approx(1.0).margin(1e-6));
  }
  {
    // Non-monotone differences: unreliable, finest value returned.
    const auto r = richardson({0.08, 0.04, 0.02}, {1.0, 1.2, 1.1});
    CHECK_FALSE(r.reliable);
    CHECK(r.extrapolated == 1.1);
  }
  CHECK_THROWS_AS(richardson({0.08, 0.04}, {1.0, 1.0}), ContractError);
  CHECK_THROWS_AS(richardson({0.08, 0.09, 0.02}, {1.0, 1.0, 1.0}), ContractError);
}
