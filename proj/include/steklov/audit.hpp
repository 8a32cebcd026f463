#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "steklov/distance_field.hpp"
#include "steklov/errors.hpp"
#include "steklov/fem.hpp"
#include "steklov/identities.hpp"
#include "steklov/mesh.hpp"
#include "steklov/oracle.hpp"
#include "steklov/richardson.hpp"
#include "steklov/shape.hpp"
#include "steklov/spectra.hpp"

namespace steklov {

using ordered_json = nlohmann::ordered_json;

struct ToleranceProfile {
  double cluster_tol = 1e-6;
  double slack_at_ref = 0.02;   // inequality slack at h = slack_ref_h, linear in h
  double slack_ref_h = 0.02;
  double identity_cap = 1e-5;   // |residual| <= cap * max(1, |lhs|, |rhs|)
  double equality_tol = 0.01;   // ball equality: |sigma_1 - c| <= tol * c
  double lower_tol = 0.005;     // thm1: sigma_1 >= c (1 - tol) after extrapolation
  double upper_tol = 0.02;      // thm2: sigma_j <= bound (1 + tol)

  double slack(double h) const { return slack_at_ref * h / slack_ref_h; }
};

struct AuditConfig {
  std::vector<ShapeSpec> shapes;
  std::vector<ordered_json> shape_echo;  // tagged objects as given in the config
  std::vector<double> ladder;            // strictly decreasing h values
  int k = 4;
  ToleranceProfile tol;
  unsigned seed = 1;
  int hessian_samples = 200;
  bool include_timings = false;
};

struct CheckResult {
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct AuditRow {
  std::string shape;
  int shape_index = 0;
  double h = 0.0;
  double c = 0.0;
  std::vector<double> sigma;
  std::vector<double> lambda;
  std::map<std::string, CheckResult> checks;
  std::map<std::string, double> residuals;
  std::map<std::string, double> timings;  // seconds, emitted only on request
  bool errored = false;
  std::string error;
};

struct ShapeExtrapolation {
  std::string shape;
  RichardsonResult sigma1, lambda1;
  double c = 0.0;
  bool thm1_pass = false;  // extrapolated sigma_1 >= c (1 - lower_tol)
};

struct AuditReport {
  ordered_json config_echo;
  std::vector<AuditRow> rows;
  std::vector<ShapeExtrapolation> extrapolation;
  std::string version = "1.0";

  bool any_failed() const {
    for (const auto& r : rows)
      for (const auto& [name, c] : r.checks)
        if (!c.pass) return true;
    for (const auto& e : extrapolation)
      if (!e.thm1_pass) return true;
    return false;
  }
  bool any_errored() const {
    for (const auto& r : rows)
      if (r.errored) return true;
    return false;
  }
};

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

inline ShapeSpec parse_shape(const ordered_json& j) {
  if (!j.is_object() || !j.contains("type"))
    throw ParseError("shape: expected a tagged object with a \"type\" field");
  const std::string type = j.at("type").get<std::string>();
  Vec3 center = Vec3::Zero();
  if (j.contains("center")) {
    const auto& c = j.at("center");
    for (size_t i = 0; i < c.size() && i < 3; ++i) center[i] = c[i].get<double>();
  }
  if (type == "ball") {
    return ShapeSpec::ball(j.value("n", 2), j.at("R").get<double>(), center);
  }
  if (type == "ellipsoid") {
    std::vector<double> axes = j.at("axes").get<std::vector<double>>();
    return ShapeSpec::ellipsoid(std::move(axes), center);
  }
  throw ParseError("shape: unknown type \"" + type + "\"");
}

inline std::string shape_name(const ShapeSpec& s) {
  char buf[160];
  if (s.kind() == ShapeKind::Ball) {
    std::snprintf(buf, sizeof buf, "ball(n=%d,R=%.17g)", s.dim(), s.radius());
  } else if (s.kind() == ShapeKind::Ellipsoid) {
    if (s.dim() == 2)
      std::snprintf(buf, sizeof buf, "ellipsoid(%.17g,%.17g)", s.axis(0), s.axis(1));
    else
      std::snprintf(buf, sizeof buf, "ellipsoid(%.17g,%.17g,%.17g)", s.axis(0), s.axis(1),
                    s.axis(2));
  } else {
    std::snprintf(buf, sizeof buf, "rotsym(R=%.17g)", s.profile().R);
  }
  return buf;
}

inline AuditConfig parse_audit_config(const ordered_json& j) {
  AuditConfig cfg;
  if (j.contains("shapes"))
    for (const auto& sj : j.at("shapes")) {
      cfg.shapes.push_back(parse_shape(sj));
      cfg.shape_echo.push_back(sj);
    }
  cfg.ladder = j.value("ladder", std::vector<double>{0.08, 0.04, 0.02});
  for (size_t i = 1; i < cfg.ladder.size(); ++i)
    if (!(cfg.ladder[i] < cfg.ladder[i - 1]))
      throw ParseError("config: ladder must be strictly decreasing");
  cfg.k = j.value("k", 4);
  if (cfg.k < 1) throw ParseError("config: k must be at least 1");
  cfg.seed = j.value("seed", 1u);
  cfg.hessian_samples = j.value("hessian_samples", 200);
  cfg.include_timings = j.value("include_timings", false);
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    cfg.tol.cluster_tol = t.value("cluster_tol", cfg.tol.cluster_tol);
    cfg.tol.slack_at_ref = t.value("slack_at_ref", cfg.tol.slack_at_ref);
    cfg.tol.slack_ref_h = t.value("slack_ref_h", cfg.tol.slack_ref_h);
    cfg.tol.identity_cap = t.value("identity_cap", cfg.tol.identity_cap);
    cfg.tol.equality_tol = t.value("equality_tol", cfg.tol.equality_tol);
    cfg.tol.lower_tol = t.value("lower_tol", cfg.tol.lower_tol);
    cfg.tol.upper_tol = t.value("upper_tol", cfg.tol.upper_tol);
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Audit pipeline
// ---------------------------------------------------------------------------

namespace detail {

/// Smooth pseudo-random boundary data: a seeded combination of linear and
/// harmonic quadratic polynomials evaluated at the vertices.
inline Eigen::VectorXd random_boundary_data(const SimplicialMesh& m, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const double a = U(rng), b = U(rng), c = U(rng), d = U(rng), e = U(rng), f = U(rng);
  Eigen::VectorXd data = Eigen::VectorXd::Zero(m.n_vertices());
  for (int v = 0; v < m.n_vertices(); ++v) {
    const Vec3& p = m.vertices[v];
    data[v] = a * p[0] + b * p[1] + c * p[2] + d * (p[0] * p[0] - p[1] * p[1]) +
              e * p[0] * p[1] + f * p[1] * p[2];
  }
  return data;
}

inline void audit_one_row(const AuditConfig& cfg, int shape_index, double h,
                          bool finest, AuditRow& row) {
  const ShapeSpec& shape = cfg.shapes[shape_index];
  const auto t0 = std::chrono::steady_clock::now();
  auto mark = [&](const char* name, std::chrono::steady_clock::time_point& last) {
    const auto now = std::chrono::steady_clock::now();
    if (cfg.include_timings)
      row.timings[name] = std::chrono::duration<double>(now - last).count();
    last = now;
  };
  auto last = t0;

  const double c = min_principal_curvature(shape);
  row.c = c;
  const int n = shape.dim();

  SimplicialMesh mesh = generate(shape, h);
  mark("mesh", last);
  FemSystem fs(mesh);
  mark("assembly", last);

  const SpectralResult st = steklov_spectrum(fs, cfg.k);
  const SpectralResult bl = boundary_spectrum(fs, cfg.k);
  row.sigma = st.eigenvalues;
  row.lambda = bl.eigenvalues;
  mark("spectra", last);

  const double slack = cfg.tol.slack(mesh.h);

  // thm1_lower: per-row with the h-dependent slack (the continuum statement
  // is re-checked against the extrapolated value at the shape level).
  {
    CheckResult ck;
    ck.value = row.sigma[1];
    ck.bound = c;
    ck.pass = row.sigma[1] >= c * (1.0 - slack);
    row.checks["thm1_lower"] = ck;
  }

  // thm2_upper_j and wang_xia_dominates.
  for (int jj = 1; jj <= cfg.k; ++jj) {
    CheckResult ck;
    ck.value = row.sigma[jj];
    ck.bound = thm2_upper(row.lambda[jj], n, c);
    ck.pass = ck.value <= ck.bound * (1.0 + cfg.tol.upper_tol);
    row.checks["thm2_upper_" + std::to_string(jj)] = ck;
  }
  {
    CheckResult ck;
    ck.value = thm2_upper(row.lambda[1], n, c);
    const double rad = row.lambda[1] - (n - 1) * c * c;
    if (rad >= -1e-12) {
      ck.bound = wang_xia_upper(row.lambda[1], n, c);
      ck.pass = ck.value <= ck.bound * (1.0 + 1e-12);
    } else {
      // Discretization put lambda_1 below the admissible range; the formula
      // comparison is vacuous here.
      ck.bound = ck.value;
      ck.pass = true;
    }
    row.checks["wang_xia_dominates"] = ck;
  }

  // ball_equality on balls: sigma_1 = c and lambda_j = (n-1) c sigma_j, j <= n.
  if (shape.kind() == ShapeKind::Ball) {
    CheckResult ck;
    ck.value = std::abs(row.sigma[1] - c) / c;
    for (int jj = 2; jj <= n && jj <= cfg.k; ++jj)
      ck.value = std::max(ck.value,
                          std::abs(row.sigma[jj] * (n - 1) * c - row.lambda[jj]) /
                              row.lambda[jj]);
    ck.bound = std::max(cfg.tol.equality_tol, slack);
    ck.pass = ck.value <= ck.bound;
    row.checks["ball_equality"] = ck;
  }

  // Identity residuals with closed-form fields (2D exact-geometry quadrature).
  if (n == 2) {
    const AnalyticField f = saddle_field();
    const AnalyticField V = level_weight(shape);
    const IdentityTerms re = reilly_residual(mesh, f, V);
    const IdentityTerms po = pohozaev_residual(mesh, f, V);
    row.residuals["reilly_lhs"] = re.lhs;
    row.residuals["reilly_rhs"] = re.rhs;
    row.residuals["reilly"] = re.residual;
    row.residuals["pohozaev_lhs"] = po.lhs;
    row.residuals["pohozaev_rhs"] = po.rhs;
    row.residuals["pohozaev"] = po.residual;
    const double re_scale = std::max({1.0, std::abs(re.lhs), std::abs(re.rhs)});
    const double po_scale = std::max({1.0, std::abs(po.lhs), std::abs(po.rhs)});
    row.checks["reilly"] = {std::abs(re.residual), cfg.tol.identity_cap * re_scale,
                            std::abs(re.residual) <= cfg.tol.identity_cap * re_scale};
    row.checks["pohozaev"] = {std::abs(po.residual), cfg.tol.identity_cap * po_scale,
                              std::abs(po.residual) <= cfg.tol.identity_cap * po_scale};
    mark("identities", last);
  }

  // Key inequalities on seeded smooth random boundary data.
  {
    const unsigned seed =
        cfg.seed + 7919u * static_cast<unsigned>(shape_index) +
        static_cast<unsigned>(std::lround(1e6 * h));
    double worst1 = std::numeric_limits<double>::infinity();
    double worst2 = worst1;
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::VectorXd data = random_boundary_data(mesh, seed + trial);
      const InequalityMargins mg = key_inequality_margins(fs, c, data);
      worst1 = std::min(worst1, mg.rel_margin1);
      worst2 = std::min(worst2, mg.rel_margin2);
    }
    row.checks["key_ineq_1"] = {worst1, -slack, worst1 >= -slack};
    row.checks["key_ineq_2"] = {worst2, -slack, worst2 >= -slack};
    mark("key_inequalities", last);
  }

  // Shape-level sweeps attached to the finest row only.
  if (finest) {
    const HessianCheck hc = hessian_comparison_check(shape, c, cfg.hessian_samples, 0.05);
    const double cap = shape.kind() == ShapeKind::Ball ? 1e-6 : 1e-3;
    row.checks["hessian_comparison"] = {hc.max_violation, cap, hc.max_violation <= cap};
    row.residuals["hessian_samples_excluded"] = hc.samples_excluded;

    const DistanceField df = distance_field(shape, mesh);
    row.checks["rho_max"] = {df.rho_max, 1.0 / c + 1e-6, df.rho_max <= 1.0 / c + 1e-6};
    mark("hessian_sweep", last);
  }

  if (cfg.include_timings)
    row.timings["total"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

inline AuditReport run_audit(const AuditConfig& cfg) {
  AuditReport rep;
  {
    ordered_json echo;
    echo["shapes"] = ordered_json::array();
    for (const auto& sj : cfg.shape_echo) echo["shapes"].push_back(sj);
    echo["ladder"] = cfg.ladder;
    echo["k"] = cfg.k;
    echo["seed"] = cfg.seed;
    echo["hessian_samples"] = cfg.hessian_samples;
    echo["include_timings"] = cfg.include_timings;
    echo["tolerances"] = {{"cluster_tol", cfg.tol.cluster_tol},
                          {"slack_at_ref", cfg.tol.slack_at_ref},
                          {"slack_ref_h", cfg.tol.slack_ref_h},
                          {"identity_cap", cfg.tol.identity_cap},
                          {"equality_tol", cfg.tol.equality_tol},
                          {"lower_tol", cfg.tol.lower_tol},
                          {"upper_tol", cfg.tol.upper_tol}};
    rep.config_echo = std::move(echo);
  }

  for (size_t s = 0; s < cfg.shapes.size(); ++s) {
    std::vector<double> hs, sigma1s, lambda1s;
    for (size_t li = 0; li < cfg.ladder.size(); ++li) {
      AuditRow row;
      row.shape = shape_name(cfg.shapes[s]);
      row.shape_index = static_cast<int>(s);
      row.h = cfg.ladder[li];
      try {
        detail::audit_one_row(cfg, static_cast<int>(s), cfg.ladder[li],
                              li + 1 == cfg.ladder.size(), row);
        hs.push_back(row.h);
        sigma1s.push_back(row.sigma[1]);
        lambda1s.push_back(row.lambda[1]);
      } catch (const std::exception& e) {
        row.errored = true;
        row.error = e.what();
      }
      rep.rows.push_back(std::move(row));
    }
    if (hs.size() >= 3) {
      ShapeExtrapolation ex;
      ex.shape = shape_name(cfg.shapes[s]);
      ex.c = min_principal_curvature(cfg.shapes[s]);
      ex.sigma1 = richardson(hs, sigma1s);
      ex.lambda1 = richardson(hs, lambda1s);
      ex.thm1_pass = ex.sigma1.extrapolated >= ex.c * (1.0 - cfg.tol.lower_tol);
      rep.extrapolation.push_back(std::move(ex));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline ordered_json report_to_json(const AuditReport& rep, bool with_timings) {
  ordered_json j;
  j["config_echo"] = rep.config_echo;
  j["rows"] = ordered_json::array();
  for (const auto& r : rep.rows) {
    ordered_json row;
    row["shape"] = r.shape;
    row["h"] = r.h;
    if (r.errored) {
      row["errored"] = true;
      row["error"] = r.error;
      j["rows"].push_back(std::move(row));
      continue;
    }
    row["c"] = r.c;
    row["sigma"] = r.sigma;
    row["lambda"] = r.lambda;
    ordered_json checks;
    for (const auto& [name, c] : r.checks)
      checks[name] = {{"value", c.value}, {"bound", c.bound}, {"pass", c.pass}};
    row["checks"] = std::move(checks);
    ordered_json res;
    for (const auto& [name, v] : r.residuals) res[name] = v;
    row["residuals"] = std::move(res);
    if (with_timings) {
      ordered_json tm;
      for (const auto& [name, v] : r.timings) tm[name] = v;
      row["timings"] = std::move(tm);
    }
    j["rows"].push_back(std::move(row));
  }
  ordered_json ex;
  for (const auto& e : rep.extrapolation) {
    ordered_json one;
    one["c"] = e.c;
    one["sigma1"] = {{"extrapolated", e.sigma1.extrapolated},
                     {"order", e.sigma1.empirical_order},
                     {"reliable", e.sigma1.reliable}};
    one["lambda1"] = {{"extrapolated", e.lambda1.extrapolated},
                      {"order", e.lambda1.empirical_order},
                      {"reliable", e.lambda1.reliable}};
    one["thm1_lower_pass"] = e.thm1_pass;
    ex[e.shape] = std::move(one);
  }
  j["extrapolation"] = std::move(ex);
  j["version"] = rep.version;
  return j;
}

/// Lossy spreadsheet projection of the report rows.
inline std::string report_to_csv(const AuditReport& rep) {
  std::ostringstream os;
  os << "shape,h,c,sigma1,lambda1,checks_passed,checks_total,errored\n";
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : rep.rows) {
    int passed = 0;
    for (const auto& [n, c] : r.checks) passed += c.pass ? 1 : 0;
    os << '"' << r.shape << "\"," << fmt(r.h) << ',' << fmt(r.c) << ','
       << fmt(r.sigma.size() > 1 ? r.sigma[1] : 0.0) << ','
       << fmt(r.lambda.size() > 1 ? r.lambda[1] : 0.0) << ',' << passed << ','
       << r.checks.size() << ',' << (r.errored ? 1 : 0) << '\n';
  }
  return os.str();
}

/// gnuplot-ready sigma_1 vs h, one block per shape.
inline std::string report_to_tsv(const AuditReport& rep) {
  std::ostringstream os;
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::string current;
  for (const auto& r : rep.rows) {
    if (r.errored) continue;
    if (r.shape != current) {
      if (!current.empty()) os << "\n\n";
      os << "# " << r.shape << "\n# h\tsigma1\n";
      current = r.shape;
    }
    os << fmt(r.h) << '\t' << fmt(r.sigma.size() > 1 ? r.sigma[1] : 0.0) << '\n';
  }
  return os.str();
}

}  // namespace steklov
