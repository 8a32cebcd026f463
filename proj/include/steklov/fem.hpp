#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <vector>

#include "steklov/errors.hpp"
#include "steklov/mesh.hpp"

namespace steklov {

/// Symmetric sparse coefficient operator (row-compressed storage).
struct SymmetricSparseOperator {
  Eigen::SparseMatrix<double> mat;

  Eigen::Index size() const { return mat.rows(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return mat * x; }
  double quadratic_form(const Eigen::VectorXd& x) const { return x.dot(mat * x); }

  /// Largest relative asymmetry |A - A^T| / |A|.
  double asymmetry() const {
    const Eigen::SparseMatrix<double> d = mat - Eigen::SparseMatrix<double>(mat.transpose());
    const double denom = mat.coeffs().cwiseAbs().maxCoeff();
    if (denom == 0.0) return 0.0;
    double num = 0.0;
    for (int k = 0; k < d.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(d, k); it; ++it)
        num = std::max(num, std::abs(it.value()));
    return num / denom;
  }
};

namespace detail {

/// Constant P1 shape-function gradients on a cell.
inline void cell_gradients(const SimplicialMesh& m, int c, Vec3 grad[4], double& vol) {
  const auto& k = m.cells[c];
  vol = cell_volume(m, c);
  if (vol <= 0.0)
    throw MeshError("assembly: degenerate cell " + std::to_string(c));
  if (m.dim == 2) {
    const Vec3 p0 = m.vertices[k[0]], p1 = m.vertices[k[1]], p2 = m.vertices[k[2]];
    auto rot = [](const Vec3& e) { return Vec3(-e[1], e[0], 0.0); };
    grad[0] = rot(p2 - p1) / (2.0 * vol);
    grad[1] = rot(p0 - p2) / (2.0 * vol);
    grad[2] = rot(p1 - p0) / (2.0 * vol);
    grad[3] = Vec3::Zero();
  } else {
    const Vec3 p0 = m.vertices[k[0]];
    Eigen::Matrix3d D;
    for (int i = 0; i < 3; ++i) D.col(i) = m.vertices[k[i + 1]] - p0;
    const Eigen::Matrix3d G = D.inverse().eval();  // rows = grads of lambda 1..3
    grad[1] = G.row(0);
    grad[2] = G.row(1);
    grad[3] = G.row(2);
    grad[0] = -(grad[1] + grad[2] + grad[3]);
  }
}

/// In-plane P1 gradients and measure of a boundary facet (1D segment or a
/// triangle embedded in 3D).
inline void facet_gradients(const SimplicialMesh& m, int f, Vec3 grad[3], double& meas) {
  const auto& k = m.bfacets[f];
  meas = facet_measure(m, f);
  if (meas <= 0.0) throw MeshError("assembly: degenerate facet " + std::to_string(f));
  if (m.dim == 2) {
    const Vec3 t = (m.vertices[k[1]] - m.vertices[k[0]]) / meas;
    grad[0] = -t / meas;
    grad[1] = t / meas;
    grad[2] = Vec3::Zero();
  } else {
    const Vec3 p0 = m.vertices[k[0]], p1 = m.vertices[k[1]], p2 = m.vertices[k[2]];
    const Vec3 n = (p1 - p0).cross(p2 - p0).normalized();
    // grad of barycentric i: in-plane normal of the opposite edge / height.
    auto edge_grad = [&](const Vec3& a, const Vec3& b, const Vec3& opp) {
      const Vec3 e = b - a;
      Vec3 g = e.cross(n);  // in-plane, perpendicular to the edge
      const double s = g.dot(opp - a);
      g /= s;  // now g . (opp - a) = 1, g . (x - a) = 0 on the edge
      return g;
    };
    grad[0] = edge_grad(p1, p2, p0);
    grad[1] = edge_grad(p2, p0, p1);
    grad[2] = edge_grad(p0, p1, p2);
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

/// Volume stiffness A_ij = int_Omega grad(phi_i) . grad(phi_j) dv.
inline SymmetricSparseOperator assemble_stiffness(const SimplicialMesh& m) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(m.n_cells() * (m.dim + 1) * (m.dim + 1));
  Vec3 g[4];
  double vol;
  for (int c = 0; c < m.n_cells(); ++c) {
    detail::cell_gradients(m, c, g, vol);
    for (int i = 0; i <= m.dim; ++i)
      for (int j = 0; j <= m.dim; ++j)
        trip.emplace_back(m.cells[c][i], m.cells[c][j], vol * g[i].dot(g[j]));
  }
  SymmetricSparseOperator op;
  op.mat.resize(m.n_vertices(), m.n_vertices());
  op.mat.setFromTriplets(trip.begin(), trip.end());
  return op;
}

/// Boundary mass B_ij = int_Sigma phi_i phi_j da, supported on boundary
/// vertices, indexed over all vertices.
inline SymmetricSparseOperator assemble_boundary_mass(const SimplicialMesh& m) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int f = 0; f < m.n_bfacets(); ++f) {
    const double meas = facet_measure(m, f);
    const int nv = m.dim;  // vertices per facet
    const double off = meas / (nv == 2 ? 6.0 : 12.0);
    const double diag = 2.0 * off;
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < nv; ++j)
        trip.emplace_back(m.bfacets[f][i], m.bfacets[f][j], i == j ? diag : off);
  }
  SymmetricSparseOperator op;
  op.mat.resize(m.n_vertices(), m.n_vertices());
  op.mat.setFromTriplets(trip.begin(), trip.end());
  return op;
}

/// P1 stiffness L and mass M of the boundary hypersurface, indexed over the
/// mesh's boundary-vertex slots.
inline std::pair<SymmetricSparseOperator, SymmetricSparseOperator>
assemble_surface_laplacian(const SimplicialMesh& m) {
  const int nb = m.n_boundary_vertices();
  std::vector<Eigen::Triplet<double>> ltrip, mtrip;
  Vec3 g[3];
  double meas;
  for (int f = 0; f < m.n_bfacets(); ++f) {
    detail::facet_gradients(m, f, g, meas);
    const int nv = m.dim;
    const double off = meas / (nv == 2 ? 6.0 : 12.0);
    for (int i = 0; i < nv; ++i) {
      const int bi = m.boundary_index[m.bfacets[f][i]];
      for (int j = 0; j < nv; ++j) {
        const int bj = m.boundary_index[m.bfacets[f][j]];
        ltrip.emplace_back(bi, bj, meas * g[i].dot(g[j]));
        mtrip.emplace_back(bi, bj, i == j ? 2.0 * off : off);
      }
    }
  }
  SymmetricSparseOperator L, M;
  L.mat.resize(nb, nb);
  M.mat.resize(nb, nb);
  L.mat.setFromTriplets(ltrip.begin(), ltrip.end());
  M.mat.setFromTriplets(mtrip.begin(), mtrip.end());
  return {std::move(L), std::move(M)};
}

/// Restriction of a full vertex field to boundary slots.
inline Eigen::VectorXd restrict_to_boundary(const SimplicialMesh& m,
                                            const Eigen::VectorXd& u) {
  Eigen::VectorXd z(m.n_boundary_vertices());
  for (int s = 0; s < m.n_boundary_vertices(); ++s) z[s] = u[m.boundary_vertices[s]];
  return z;
}

/// Normal derivative of the P1 field in the cell incident to facet f.
inline double facet_normal_derivative(const SimplicialMesh& m, const Eigen::VectorXd& u,
                                      int f) {
  Vec3 g[4];
  double vol;
  const int c = m.bfacet_cell[f];
  detail::cell_gradients(m, c, g, vol);
  Vec3 grad_u = Vec3::Zero();
  for (int i = 0; i <= m.dim; ++i) grad_u += u[m.cells[c][i]] * g[i];
  return grad_u.dot(facet_normal(m, f));
}

/// The four quadratic functionals of a vertex field.
struct Functionals {
  double dirichlet_energy = 0.0;       // int_Omega |grad u|^2
  double boundary_l2 = 0.0;            // int_Sigma u^2
  double normal_derivative_l2 = 0.0;   // int_Sigma (d_nu u)^2, O(h) flux recovery
  double tangential_gradient_l2 = 0.0; // int_Sigma |grad_Sigma u|^2
};

// ---------------------------------------------------------------------------
// Assembled system with a reusable interior factorization
// ---------------------------------------------------------------------------

class FemSystem {
 public:
  explicit FemSystem(const SimplicialMesh& mesh)
      : mesh_(&mesh),
        stiffness_(assemble_stiffness(mesh)),
        boundary_mass_(assemble_boundary_mass(mesh)) {
    auto lm = assemble_surface_laplacian(mesh);
    surface_stiffness_ = std::move(lm.first);
    surface_mass_ = std::move(lm.second);

    for (int v = 0; v < mesh.n_vertices(); ++v)
      if (!mesh.is_boundary_vertex(v)) {
        interior_index_.push_back(v);
      }
    interior_slot_.assign(mesh.n_vertices(), -1);
    for (size_t s = 0; s < interior_index_.size(); ++s)
      interior_slot_[interior_index_[s]] = static_cast<int>(s);

    // Interior block of the stiffness matrix.
    const auto& A = stiffness_.mat;
    std::vector<Eigen::Triplet<double>> aii, aib;
    for (int k = 0; k < A.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
        const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
        if (interior_slot_[i] >= 0 && interior_slot_[j] >= 0)
          aii.emplace_back(interior_slot_[i], interior_slot_[j], it.value());
        else if (interior_slot_[i] >= 0 && interior_slot_[j] < 0)
          aib.emplace_back(interior_slot_[i], mesh.boundary_index[j], it.value());
      }
    }
    const int ni = static_cast<int>(interior_index_.size());
    const int nb = mesh.n_boundary_vertices();
    a_ii_.resize(ni, ni);
    a_ii_.setFromTriplets(aii.begin(), aii.end());
    a_ib_.resize(ni, nb);
    a_ib_.setFromTriplets(aib.begin(), aib.end());
    if (ni > 0) {
      factor_.compute(a_ii_);
      if (factor_.info() != Eigen::Success)
        throw NumericalError("FemSystem: interior stiffness factorization failed");
    }
  }

  const SimplicialMesh& mesh() const { return *mesh_; }
  const SymmetricSparseOperator& stiffness() const { return stiffness_; }
  const SymmetricSparseOperator& boundary_mass() const { return boundary_mass_; }
  const SymmetricSparseOperator& surface_stiffness() const { return surface_stiffness_; }
  const SymmetricSparseOperator& surface_mass() const { return surface_mass_; }
  int n_interior() const { return static_cast<int>(interior_index_.size()); }

  /// Interior solve against a dense block of boundary-indexed right-hand
  /// sides: X = A_ii^{-1} (A_ib G).
  Eigen::MatrixXd solve_interior(const Eigen::MatrixXd& rhs) const {
    return factor_.solve(rhs);
  }
  const Eigen::SparseMatrix<double>& a_ii() const { return a_ii_; }
  const Eigen::SparseMatrix<double>& a_ib() const { return a_ib_; }

  /// Harmonic extension of Dirichlet data given on boundary vertices
  /// (boundary slots of `boundary_data` are read; interior entries ignored).
  Eigen::VectorXd harmonic_extension(const Eigen::VectorXd& boundary_data) const {
    const auto& m = *mesh_;
    Eigen::VectorXd g(m.n_boundary_vertices());
    for (int s = 0; s < m.n_boundary_vertices(); ++s)
      g[s] = boundary_data[m.boundary_vertices[s]];
    Eigen::VectorXd u(m.n_vertices());
    for (int s = 0; s < m.n_boundary_vertices(); ++s) u[m.boundary_vertices[s]] = g[s];
    if (n_interior() > 0) {
      const Eigen::VectorXd rhs = -(a_ib_ * g);
      const Eigen::VectorXd ui = factor_.solve(rhs);
      const double resid = (a_ii_ * ui - rhs).norm();
      const double scale = std::max(rhs.norm(), 1e-300);
      if (resid > 1e-10 * scale && resid > 1e-14)
        throw NumericalError("harmonic_extension: interior residual " +
                             std::to_string(resid / scale));
      for (int s = 0; s < n_interior(); ++s) u[interior_index_[s]] = ui[s];
    }
    return u;
  }

  Functionals functionals(const Eigen::VectorXd& u) const {
    const auto& m = *mesh_;
    if (u.size() != m.n_vertices())
      throw ContractError("functionals: field size must equal vertex count");
    Functionals F;
    F.dirichlet_energy = stiffness_.quadratic_form(u);
    F.boundary_l2 = boundary_mass_.quadratic_form(u);
    const Eigen::VectorXd z = restrict_to_boundary(m, u);
    F.tangential_gradient_l2 = surface_stiffness_.quadratic_form(z);
    for (int f = 0; f < m.n_bfacets(); ++f) {
      const double dn = facet_normal_derivative(m, u, f);
      F.normal_derivative_l2 += dn * dn * facet_measure(m, f);
    }
    return F;
  }

 private:
  const SimplicialMesh* mesh_;
  SymmetricSparseOperator stiffness_, boundary_mass_, surface_stiffness_, surface_mass_;
  std::vector<int> interior_index_;
  std::vector<int> interior_slot_;
  Eigen::SparseMatrix<double> a_ii_, a_ib_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor_;
};

/// One-shot harmonic extension (see FemSystem for the reusable variant).
inline Eigen::VectorXd harmonic_extension(const SimplicialMesh& m,
                                          const Eigen::VectorXd& boundary_data) {
  return FemSystem(m).harmonic_extension(boundary_data);
}

inline Functionals functionals(const SimplicialMesh& m, const Eigen::VectorXd& u) {
  return FemSystem(m).functionals(u);
}

}  // namespace steklov
