#include <catch2/catch_amalgamated.hpp>

#include "steklov/mesh.hpp"
#include "steklov/mesh_io.hpp"

using namespace steklov;
using Catch::Approx;

TEST_CASE("disk mesh geometry") {
  const auto shape = ShapeSpec::ball(2, 1.0);
  const auto coarse = generate(shape, 0.4);
  validate(coarse);
  CHECK(mesh_volume(coarse) == Approx(M_PI).epsilon(0.05));

  const auto fine = generate(shape, 0.05);
  validate(fine);
  CHECK(fine.h <= 1.5 * 0.05);
  CHECK(boundary_measure(fine) == Approx(2.0 * M_PI).epsilon(0.002));
  for (int v : fine.boundary_vertices)
    CHECK(std::abs(shape.level(fine.vertices[v]) - 1.0) <= 1e-10);
}

TEST_CASE("ellipse mesh geometry") {
  const auto shape = ShapeSpec::ellipsoid({2.0, 1.0});
  const auto mesh = generate(shape, 0.05);
  validate(mesh);
  CHECK(mesh.h <= 1.5 * 0.05);
  CHECK(mesh_volume(mesh) == Approx(2.0 * M_PI).epsilon(0.005));
}

TEST_CASE("3D ball mesh geometry") {
  const auto shape = ShapeSpec::ball(3, 1.0);
  const auto mesh = generate(shape, 0.35);
  validate(mesh);
  CHECK(mesh_volume(mesh) == Approx(4.0 * M_PI / 3.0).epsilon(0.08));
  CHECK(boundary_measure(mesh) == Approx(4.0 * M_PI).epsilon(0.08));
}

TEST_CASE("generate rejects bad target size") {
  const auto shape = ShapeSpec::ball(2, 1.0);
  CHECK_THROWS_AS(generate(shape, 0.0), ContractError);
  CHECK_THROWS_AS(generate(shape, 0.6), ContractError);  // >= diameter / 4
  CHECK_THROWS_AS(generate(shape, 1e-7), MeshError);     // vertex budget
}

TEST_CASE("red refinement") {
  const auto shape = ShapeSpec::ball(2, 1.0);
  auto mesh = generate(shape, 0.4);
  const double err0 = std::abs(mesh_volume(mesh) - M_PI);
  const auto ref = refine(mesh);
  validate(ref);
  CHECK(ref.n_cells() == 4 * mesh.n_cells());
  CHECK(ref.h <= 0.55 * mesh.h);
  CHECK(ref.h >= 0.45 * mesh.h);
  const double err1 = std::abs(mesh_volume(ref) - M_PI);
  CHECK(err0 / err1 >= 3.0);  // O(h^2) geometric convergence
  const auto ref2 = refine(ref);
  validate(ref2);
  CHECK(err1 / std::abs(mesh_volume(ref2) - M_PI) >= 3.0);
}

TEST_CASE("3D refinement") {
  const auto shape = ShapeSpec::ball(3, 1.0);
  const auto mesh = generate(shape, 0.45);
  const auto ref = refine(mesh);
  validate(ref);
  CHECK(ref.n_cells() == 8 * mesh.n_cells());
  const double err0 = std::abs(mesh_volume(mesh) - 4.0 * M_PI / 3.0);
  const double err1 = std::abs(mesh_volume(ref) - 4.0 * M_PI / 3.0);
  CHECK(err0 / err1 >= 3.0);
}

TEST_CASE("boundary facet orientation") {
  for (const auto& shape :
       {ShapeSpec::ball(2, 1.0), ShapeSpec::ellipsoid({2.0, 1.0}),
        ShapeSpec::ball(3, 1.0)}) {
    const auto mesh = generate(shape, 0.4);
    for (int f = 0; f < mesh.n_bfacets(); ++f) {
      const Vec3 out = facet_centroid(mesh, f) - cell_centroid(mesh, mesh.bfacet_cell[f]);
      CHECK(facet_normal(mesh, f).dot(out) > 0.0);
    }
  }
}

TEST_CASE("mesh text round trip") {
  const auto shape = ShapeSpec::ellipsoid({2.0, 1.0});
  const auto mesh = generate(shape, 0.2);
  const std::string text = export_mesh(mesh);
  const auto back = import_mesh(text);
  REQUIRE(back.n_vertices() == mesh.n_vertices());
  REQUIRE(back.n_cells() == mesh.n_cells());
  REQUIRE(back.n_bfacets() == mesh.n_bfacets());
  for (int v = 0; v < mesh.n_vertices(); ++v)
    CHECK((back.vertices[v] - mesh.vertices[v]).norm() == 0.0);  // bit-exact
  for (int c = 0; c < mesh.n_cells(); ++c) CHECK(back.cells[c] == mesh.cells[c]);
  for (int f = 0; f < mesh.n_bfacets(); ++f) CHECK(back.bfacets[f] == mesh.bfacets[f]);
  CHECK(export_mesh(back) == text);
}

TEST_CASE("single reference triangle file") {
  const std::string text =
      "# reference triangle\n"
      "2 3 1 3\n"
      "0 0\n1 0\n0 1\n"
      "0 1 2\n"
      "0 1\n1 2\n2 0\n";
  const auto mesh = import_mesh(text);
  CHECK(mesh.n_cells() == 1);
  CHECK(mesh.n_bfacets() == 3);
  CHECK(mesh_volume(mesh) == Approx(0.5));
}

TEST_CASE("import errors are distinct") {
  CHECK_THROWS_WITH(import_mesh("2 3\n"), Catch::Matchers::ContainsSubstring("header"));
  CHECK_THROWS_WITH(
      import_mesh("2 3 1 3\n0 0\n1 0\n0 1\n0 1 5\n0 1\n1 2\n2 0\n"),
      Catch::Matchers::ContainsSubstring("out of range"));
  // Boundary with a missing facet is an open complex.
  CHECK_THROWS_WITH(import_mesh("2 3 1 2\n0 0\n1 0\n0 1\n0 1 2\n0 1\n1 2\n"),
                    Catch::Matchers::ContainsSubstring("boundary not closed"));
}

TEST_CASE("field export appends one value per vertex") {
  const auto mesh = generate(ShapeSpec::ball(2, 1.0), 0.4);
  Eigen::VectorXd u(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v) u[v] = mesh.vertices[v][0];
  const std::string text = export_field(mesh, u);
  // Mesh block plus exactly n_vertices extra lines.
  const auto count = std::count(text.begin(), text.end(), '\n');
  const std::string bare = export_mesh(mesh);
  const auto base = std::count(bare.begin(), bare.end(), '\n');
  CHECK(count == base + mesh.n_vertices());
  Eigen::VectorXd wrong(mesh.n_vertices() + 1);
  CHECK_THROWS_AS(export_field(mesh, wrong), ContractError);
}
