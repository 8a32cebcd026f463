#pragma once

#include <vector>

#include "steklov/mesh.hpp"
#include "steklov/shape.hpp"

namespace steklov {

/// Vertex-wise exact distance to the boundary with a near-cut-locus flag.
struct DistanceField {
  const SimplicialMesh* mesh = nullptr;
  Eigen::VectorXd rho;             // one value per vertex, 0 on boundary vertices
  std::vector<char> near_cut;      // projection-disagreement flag per vertex
  double rho_max = 0.0;
};

/// Exact rho via analytic projection at every vertex. A vertex is flagged
/// near the cut locus when probe projections around it land on feet farther
/// than 10*h apart while the distances agree to probe tolerance.
inline DistanceField distance_field(const ShapeSpec& shape, const SimplicialMesh& mesh,
                                    double band = 0.0) {
  shape.require_analytic();
  DistanceField df;
  df.mesh = &mesh;
  df.rho.resize(mesh.n_vertices());
  df.near_cut.assign(mesh.n_vertices(), 0);
  const double probe = band > 0.0 ? band : 5.0 * mesh.h;

  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (mesh.is_boundary_vertex(v)) {
      df.rho[v] = 0.0;
      continue;
    }
    const auto pr = signed_projection(shape, mesh.vertices[v]);
    df.rho[v] = pr.rho;
    if (pr.degenerate) {
      df.near_cut[v] = 1;
      continue;
    }
    const double spread = projection_spread(shape, mesh.vertices[v], probe);
    if (spread > 10.0 * mesh.h) df.near_cut[v] = 1;
  }
  df.rho_max = df.rho.maxCoeff();
  return df;
}

}  // namespace steklov
