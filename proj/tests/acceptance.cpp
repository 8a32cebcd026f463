#include <catch2/catch_amalgamated.hpp>
#include <chrono>
#include <cstdio>
#include <random>

#include "steklov/audit.hpp"

using namespace steklov;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int k, bool pass, const std::string& detail) {
  std::printf("CRITERION %d: %s — %s\n", k, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  CHECK(pass);
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

double fem_sigma1(const ShapeSpec& shape, double h) {
  const auto mesh = generate(shape, h);
  const FemSystem fs(mesh);
  return steklov_spectrum(fs, 1).eigenvalues[1];
}

/// Shared full 2D audit (three shapes, three-level ladder), computed once.
const AuditReport& full_audit() {
  static const AuditReport rep = [] {
    return run_audit(parse_audit_config(ordered_json::parse(R"({
      "shapes": [{"type": "ball", "n": 2, "R": 1.0},
                 {"type": "ball", "n": 2, "R": 2.0},
                 {"type": "ellipsoid", "axes": [2.0, 1.0]}],
      "ladder": [0.08, 0.04, 0.02],
      "k": 4,
      "hessian_samples": 2000
    })")));
  }();
  return rep;
}

}  // namespace

TEST_CASE("criterion 1: disk ladders extrapolate to the exact value") {
  bool pass = true;
  std::string detail;
  for (const auto& [R, lo, hi] : {std::tuple{1.0, 0.998, 1.002},
                                  std::tuple{2.0, 0.499, 0.501}}) {
    const auto t0 = std::chrono::steady_clock::now();
    const ShapeSpec shape = ShapeSpec::ball(2, R);
    std::vector<double> hs = {0.08, 0.04, 0.02}, vals;
    for (double h : hs) vals.push_back(fem_sigma1(shape, h));
    const auto ex = richardson(hs, vals);
    const double dt = seconds_since(t0);
    pass = pass && ex.reliable && ex.extrapolated >= lo && ex.extrapolated <= hi &&
           dt <= 60.0;
    detail += fmt("R=%.3g: sigma1*=%.8f in %.1fs; ", R, ex.extrapolated, dt);
  }
  report(1, pass, detail);
}

TEST_CASE("criterion 2: 3D unit ball spectra") {
  const auto t0 = std::chrono::steady_clock::now();
  const auto mesh = generate(ShapeSpec::ball(3, 1.0), 0.1);
  const FemSystem fs(mesh);
  const auto st = steklov_spectrum(fs, 3);
  const auto bl = boundary_spectrum(fs, 3);
  const double dt = seconds_since(t0);

  bool pass = mesh.n_cells() >= 100000 && dt <= 600.0;
  double worst_sigma = 0.0, worst_rel = 0.0;
  for (int j = 1; j <= 3; ++j) {
    worst_sigma = std::max(worst_sigma, std::abs(st.eigenvalues[j] - 1.0));
    worst_rel = std::max(worst_rel, std::abs(st.eigenvalues[j] * 2.0 * 1.0 -
                                             bl.eigenvalues[j]) /
                                        bl.eigenvalues[j]);
  }
  pass = pass && worst_sigma <= 0.03 && worst_rel <= 0.05;
  report(2, pass,
         fmt("143k-tet ball: |sigma_j - 1| <= %.2e, lambda-relation error <= %.2e",
             worst_sigma, worst_rel) +
             fmt(" (%.0f cells, %.0fs)", (double)mesh.n_cells(), dt));
}

TEST_CASE("criterion 3: lower bound holds on non-ball shapes") {
  // Ellipse(2,1): c = b/a^2 = 0.25, extrapolated sigma_1 strictly above.
  const ShapeSpec ellipse = ShapeSpec::ellipsoid({2.0, 1.0});
  std::vector<double> hs = {0.08, 0.04, 0.02}, vals;
  for (double h : hs) vals.push_back(fem_sigma1(ellipse, h));
  const auto ex = richardson(hs, vals);
  const bool p2d = ex.extrapolated >= 0.25 * 0.99 && ex.extrapolated > 0.25;

  // Ellipsoid(1.5, 1.2, 1): c = a3 / a1^2.
  const double c3 = 1.0 / 2.25;
  const double s3 = fem_sigma1(ShapeSpec::ellipsoid({1.5, 1.2, 1.0}), 0.2);
  const bool p3d = s3 >= c3 * (1.0 - 0.03);

  report(3, p2d && p3d,
         fmt("ellipse sigma1*=%.6f >= 0.25; ellipsoid sigma1=%.4f >= %.4f",
             ex.extrapolated, s3, c3));
}

TEST_CASE("criterion 4: upper bounds dominate on every audit row") {
  const auto& rep = full_audit();
  bool pass = !rep.any_errored() && !rep.rows.empty();
  double worst = 0.0;
  for (const auto& row : rep.rows) {
    if (row.errored) continue;
    const int n = 2;
    for (int j = 1; j <= 4; ++j) {
      const double bound = thm2_upper(row.lambda[j], n, row.c);
      pass = pass && row.sigma[j] <= bound * 1.02;
      worst = std::max(worst, row.sigma[j] / bound);
    }
    const double t2 = thm2_upper(row.lambda[1], n, row.c);
    pass = pass && t2 <= wang_xia_upper(row.lambda[1], n, row.c) + 1e-12;
  }
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 2 + (rng() % 2);
    const double c = 0.05 + 3.0 * U(rng);
    const double l1 = (n - 1) * c * c * (1.0 + 5.0 * U(rng));
    pass = pass && thm2_upper(l1, n, c) <= wang_xia_upper(l1, n, c) + 1e-12;
  }
  report(4, pass, fmt("max sigma_j / bound_j = %.4f over all rows; 1e4 random "
                      "triples dominated", worst));
}

TEST_CASE("criterion 5: key inequality margins on sampled data") {
  const ShapeSpec ellipse = ShapeSpec::ellipsoid({2.0, 1.0});
  const double c = min_principal_curvature(ellipse);

  auto most_negative = [&](double h) {
    const auto mesh = generate(ellipse, h);
    const FemSystem fs(mesh);
    double worst = std::numeric_limits<double>::infinity();
    for (unsigned seed = 1; seed <= 20; ++seed) {
      const auto data = detail::random_boundary_data(mesh, seed);
      const auto mg = key_inequality_margins(fs, c, data);
      worst = std::min({worst, mg.rel_margin1, mg.rel_margin2});
    }
    return worst;
  };
  const double m1 = most_negative(0.02);
  const double m2 = most_negative(0.01);
  bool pass = m1 >= -0.02;
  // Any negative tail must shrink by at least 1.5x under refinement; with no
  // negative tail the clause holds trivially.
  pass = pass && ((m1 >= 0.0 && m2 >= -1e-12) || (m1 < 0.0 && m2 >= m1 / 1.5));

  const auto disk = generate(ShapeSpec::ball(2, 1.0), 0.02);
  const FemSystem fsd(disk);
  Eigen::VectorXd x(disk.n_vertices());
  for (int v = 0; v < disk.n_vertices(); ++v) x[v] = disk.vertices[v][0];
  const auto mg = key_inequality_margins(fsd, 1.0, x);
  pass = pass && std::abs(mg.rel_margin1) <= 0.02 && std::abs(mg.rel_margin2) <= 0.02;

  report(5, pass,
         fmt("ellipse worst margin %.4f (h=0.02) -> %.4f (h=0.01); disk "
             "equality-case margins %.1e",
             m1, m2, std::max(std::abs(mg.rel_margin1), std::abs(mg.rel_margin2))));
}

TEST_CASE("criterion 6: integral identities at closed-form pairs") {
  struct Pair {
    ShapeSpec shape;
    AnalyticField f, V;
  };
  const ShapeSpec disk = ShapeSpec::ball(2, 1.0);
  const ShapeSpec ellipse = ShapeSpec::ellipsoid({2.0, 1.0});
  const std::vector<Pair> pairs = {
      {disk, coordinate_field(0), ball_weight(disk, 1.0)},
      {disk, saddle_field(), ball_weight(disk, 1.0)},
      {ellipse, saddle_field(), level_weight(ellipse)}};

  bool pass = true;
  double worst_fine = 0.0;
  for (const auto& pr : pairs) {
    std::vector<double> res;
    for (double h : {0.04, 0.02}) {
      const auto mesh = generate(pr.shape, h);
      res.push_back(std::max(std::abs(reilly_residual(mesh, pr.f, pr.V).residual),
                             std::abs(pohozaev_residual(mesh, pr.f, pr.V).residual)));
    }
    pass = pass && res[1] <= 1e-6;
    worst_fine = std::max(worst_fine, res[1]);
    // Order >= 1.5 between the two levels, or rounding-floor residuals at
    // both, which is already beyond any finite convergence order.
    const bool floored = res[0] <= 1e-9 && res[1] <= 1e-9;
    pass = pass && (floored || res[1] <= res[0] / std::pow(2.0, 1.5));
  }
  report(6, pass, fmt("three closed-form pairs, max |residual| = %.2e at h=0.02",
                      worst_fine));
}

TEST_CASE("criterion 7: Hessian comparison and distance bound") {
  bool pass = true;
  double ball_worst = 0.0;
  for (double R : {1.0, 2.0}) {
    const auto hc = hessian_comparison_check(ShapeSpec::ball(2, R), 1.0 / R, 2000);
    pass = pass && hc.max_violation <= 1e-6 && hc.samples_kept == 2000;
    ball_worst = std::max(ball_worst, hc.max_violation);
  }
  const ShapeSpec ellipse = ShapeSpec::ellipsoid({2.0, 1.0});
  const auto he = hessian_comparison_check(ellipse, 0.25, 2000, 0.05);
  pass = pass && he.max_violation <= 1e-3;

  const auto dfb = distance_field(ShapeSpec::ball(2, 1.0),
                                  generate(ShapeSpec::ball(2, 1.0), 0.02));
  const auto dfe = distance_field(ellipse, generate(ellipse, 0.02));
  pass = pass && dfb.rho_max <= 1.0 + 1e-6 && dfe.rho_max <= 4.0 + 1e-6;

  report(7, pass,
         fmt("ball violation <= %.1e, ellipse <= %.1e; rho_max %.4f <= 1/c",
             ball_worst, he.max_violation, dfe.rho_max));
}

TEST_CASE("criterion 8: rotationally symmetric oracle") {
  bool pass = true;
  double worst = 0.0;
  for (double R : {0.5, 1.0, 2.0}) {
    const auto p = flat_profile(R);
    for (int l = 1; l <= 6; ++l) {
      const double err = std::abs(rotsym_steklov(p, l) - l / R) / (l / R);
      pass = pass && err <= 1e-8;
      worst = std::max(worst, err);
    }
  }
  const double fem = fem_sigma1(ShapeSpec::ball(2, 1.0), 0.02);
  const double shoot = rotsym_steklov(flat_profile(1.0), 1);
  pass = pass && std::abs(fem - shoot) <= 0.005 * shoot;

  for (int n : {2, 3})
    for (double R : {0.5, 1.0, 2.0}) {
      const auto sig = ball_steklov(n, R, 13);
      const auto lam = sphere_laplacian(n, R, 13);
      for (int i = 0; i < 13; ++i)
        pass = pass &&
               std::abs(lam[i] * R - sig[i] * (sig[i] * R + n - 2)) <= 1e-12;
    }
  report(8, pass,
         fmt("flat-profile shooting error <= %.1e; FEM disk sigma1=%.5f vs "
             "shooting %.5f; spectra cross-relation exact",
             worst, fem, shoot));
}

TEST_CASE("criterion 9: audit reports are byte deterministic") {
  const auto cfg = parse_audit_config(ordered_json::parse(R"({
    "shapes": [{"type": "ball", "n": 2, "R": 1.0},
               {"type": "ellipsoid", "axes": [2.0, 1.0]}],
    "ladder": [0.08, 0.04, 0.02],
    "k": 4
  })"));
  const std::string a = report_to_json(run_audit(cfg), false).dump(2);
  const std::string b = report_to_json(run_audit(cfg), false).dump(2);
  report(9, a == b && !a.empty(),
         fmt("two runs produced identical %.0f-byte JSON reports", (double)a.size()));
}
