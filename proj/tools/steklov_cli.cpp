#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "steklov/audit.hpp"
#include "steklov/oracle.hpp"

namespace {

steklov::ShapeSpec shape_from_descriptor(const std::string& desc) {
  const auto j = steklov::ordered_json::parse(desc);
  return steklov::parse_shape(j);
}

steklov::RotSymProfile profile_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw steklov::ParseError("cannot open profile file: " + path);
  steklov::RotSymProfile p;
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find_first_not_of(" \t");
    if (pos == std::string::npos || line[pos] == '#') continue;
    std::istringstream ls(line);
    double r, f;
    if (!(ls >> r >> f))
      throw steklov::ParseError("profile file: expected \"r f\" pairs per line");
    p.r.push_back(r);
    p.f.push_back(f);
  }
  if (p.r.empty()) throw steklov::ParseError("profile file: no samples");
  p.R = p.r.back();
  return p;
}

void print_values(const char* label, const std::vector<double>& v) {
  std::printf("%s:", label);
  for (double x : v) std::printf(" %.12g", x);
  std::printf("\n");
}

int cmd_audit(const std::string& config_path, const std::string& json_out,
              const std::string& csv_out, const std::string& tsv_out) {
  std::ifstream in(config_path);
  if (!in) {
    std::fprintf(stderr, "cannot open config: %s\n", config_path.c_str());
    return 3;
  }
  steklov::ordered_json cj;
  in >> cj;
  const steklov::AuditConfig cfg = steklov::parse_audit_config(cj);
  const steklov::AuditReport rep = steklov::run_audit(cfg);

  {
    std::ofstream out(json_out);
    if (!out) {
      std::fprintf(stderr, "cannot write %s\n", json_out.c_str());
      return 3;
    }
    out << steklov::report_to_json(rep, cfg.include_timings).dump(2) << "\n";
  }
  if (!csv_out.empty()) {
    std::ofstream out(csv_out);
    out << steklov::report_to_csv(rep);
  }
  if (!tsv_out.empty()) {
    std::ofstream out(tsv_out);
    out << steklov::report_to_tsv(rep);
  }

  for (const auto& r : rep.rows) {
    if (r.errored) {
      std::printf("%-28s h=%-6g ERROR: %s\n", r.shape.c_str(), r.h, r.error.c_str());
      continue;
    }
    int passed = 0;
    for (const auto& [n, c] : r.checks) passed += c.pass ? 1 : 0;
    std::printf("%-28s h=%-6g sigma1=%.6f c=%.6f checks %d/%zu\n", r.shape.c_str(), r.h,
                r.sigma[1], r.c, passed, r.checks.size());
  }
  for (const auto& e : rep.extrapolation)
    std::printf("%-28s extrapolated sigma1=%.8f (order %.2f) thm1 %s\n", e.shape.c_str(),
                e.sigma1.extrapolated, e.sigma1.empirical_order,
                e.thm1_pass ? "pass" : "FAIL");

  if (rep.any_errored()) return 3;
  if (rep.any_failed()) return 2;
  return 0;
}

int cmd_spectrum(const std::string& desc, double h, int k, const std::string& problem) {
  const steklov::ShapeSpec shape = shape_from_descriptor(desc);
  const steklov::SimplicialMesh mesh = steklov::generate(shape, h);
  const steklov::FemSystem fs(mesh);
  const steklov::SpectralResult res =
      problem == "boundary" ? steklov::boundary_spectrum(fs, k)
                            : steklov::steklov_spectrum(fs, k);
  std::printf("# %s, h=%g (realized %g), %d vertices, %d cells\n", desc.c_str(), h,
              mesh.h, mesh.n_vertices(), mesh.n_cells());
  print_values(problem == "boundary" ? "lambda" : "sigma", res.eigenvalues);
  return 0;
}

int cmd_identity(const std::string& check, const std::string& desc, double h) {
  const steklov::ShapeSpec shape = shape_from_descriptor(desc);
  if (check == "hessian") {
    const double c = steklov::min_principal_curvature(shape);
    const auto hc = steklov::hessian_comparison_check(shape, c, 2000, 0.05);
    std::printf("hessian: c=%.12g max_violation=%.6e kept=%d excluded=%d\n", c,
                hc.max_violation, hc.samples_kept, hc.samples_excluded);
    return 0;
  }
  const steklov::SimplicialMesh mesh = steklov::generate(shape, h);
  if (check == "key") {
    const steklov::FemSystem fs(mesh);
    const double c = steklov::min_principal_curvature(shape);
    Eigen::VectorXd data(mesh.n_vertices());
    for (int v = 0; v < mesh.n_vertices(); ++v) data[v] = mesh.vertices[v][0];
    const auto mg = steklov::key_inequality_margins(fs, c, data);
    std::printf("key: c=%.12g margin1=%.6e margin2=%.6e rel1=%.6e rel2=%.6e\n", c,
                mg.margin1, mg.margin2, mg.rel_margin1, mg.rel_margin2);
    return 0;
  }
  const steklov::AnalyticField f = steklov::saddle_field();
  const steklov::AnalyticField V = steklov::level_weight(shape);
  const steklov::IdentityTerms t = check == "reilly"
                                       ? steklov::reilly_residual(mesh, f, V)
                                       : steklov::pohozaev_residual(mesh, f, V);
  std::printf("%s: lhs=%.12g rhs=%.12g residual=%.6e\n", check.c_str(), t.lhs, t.rhs,
              t.residual);
  for (const auto& [name, v] : t.terms) std::printf("  %s = %.12g\n", name.c_str(), v);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steklov spectral-geometry audit toolkit"};
  app.require_subcommand(1);
  // --h is a spec'd option name; keep only the long form of the help flag.
  app.set_help_flag("--help", "print help");

  std::string config_path, json_out, csv_out, tsv_out;
  auto* audit = app.add_subcommand("audit", "run a full audit from a JSON config");
  audit->add_option("--config", config_path)->required();
  audit->add_option("--json-out", json_out)->required();
  audit->add_option("--csv-out", csv_out);
  audit->add_option("--tsv-out", tsv_out);

  std::string shape_desc, problem = "steklov";
  double h = 0.05;
  int k = 4;
  auto* spectrum = app.add_subcommand("spectrum", "compute one discrete spectrum");
  spectrum->set_help_flag("--help", "print help");
  spectrum->add_option("--shape", shape_desc)->required();
  spectrum->add_option("--h", h)->required();
  spectrum->add_option("--k", k);
  spectrum->add_option("--problem", problem)
      ->check(CLI::IsMember({"steklov", "boundary"}));

  std::string check;
  std::string id_shape;
  double id_h = 0.02;
  auto* identity = app.add_subcommand("identity", "evaluate one identity or sweep");
  identity->set_help_flag("--help", "print help");
  identity->add_option("--check", check)
      ->required()
      ->check(CLI::IsMember({"reilly", "pohozaev", "key", "hessian"}));
  identity->add_option("--shape", id_shape)->required();
  identity->add_option("--h", id_h);

  std::string ball_desc, rotsym_path;
  int ok = 6, modes = 4;
  auto* oracle = app.add_subcommand("oracle", "closed-form and shooting ground truth");
  oracle->add_option("--ball", ball_desc, "n=<int> R=<float>");
  oracle->add_option("--rotsym", rotsym_path, "profile file of \"r f\" samples");
  oracle->add_option("--k", ok);
  oracle->add_option("--modes", modes);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(audit))
      return cmd_audit(config_path, json_out, csv_out, tsv_out);
    if (app.got_subcommand(spectrum)) return cmd_spectrum(shape_desc, h, k, problem);
    if (app.got_subcommand(identity)) return cmd_identity(check, id_shape, id_h);
    if (app.got_subcommand(oracle)) {
      if (!ball_desc.empty()) {
        int n = 2;
        double R = 1.0;
        if (std::sscanf(ball_desc.c_str(), "n=%d R=%lf", &n, &R) != 2)
          throw steklov::ParseError("oracle --ball expects \"n=<int> R=<float>\"");
        print_values("sigma", steklov::ball_steklov(n, R, ok + 1));
        print_values("lambda", steklov::sphere_laplacian(n, R, ok + 1));
        return 0;
      }
      if (!rotsym_path.empty()) {
        const steklov::RotSymProfile p = profile_from_file(rotsym_path);
        std::vector<double> sig;
        for (int l = 1; l <= modes; ++l) sig.push_back(steklov::rotsym_steklov(p, l));
        print_values("sigma", sig);
        return 0;
      }
      throw steklov::ParseError("oracle: need --ball or --rotsym");
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
