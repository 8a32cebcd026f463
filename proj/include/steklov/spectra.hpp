#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "steklov/fem.hpp"
#include "steklov/mesh.hpp"

namespace steklov {

enum class ProblemKind { Steklov, BoundaryLaplacian };

/// Eigenvalues/vectors of one discrete eigenproblem, ascending, with
/// per-pair residual diagnostics.
struct SpectralResult {
  ProblemKind problem = ProblemKind::Steklov;
  double h = 0.0;
  std::vector<double> eigenvalues;      // k+1 values, ascending, sigma_0 ~ 0
  Eigen::MatrixXd boundary_vectors;     // nb x (k+1), mass-orthonormal
  std::vector<Eigen::VectorXd> fields;  // Steklov: harmonic extensions (full size)
  std::vector<double> residual_norms;   // ||K u - mu M u|| / ||K u|| per pair

  /// Indices grouped into clusters of (numerically) multiple eigenvalues.
  std::vector<std::vector<int>> clusters(double rel_tol = 1e-6) const {
    std::vector<std::vector<int>> out;
    const double scale = eigenvalues.empty() ? 1.0
                                             : std::abs(eigenvalues.back()) + 1.0;
    for (size_t i = 0; i < eigenvalues.size(); ++i) {
      if (!out.empty() &&
          std::abs(eigenvalues[i] - eigenvalues[out.back().back()]) <=
              rel_tol * (std::abs(eigenvalues[i]) + rel_tol * scale))
        out.back().push_back(static_cast<int>(i));
      else
        out.push_back({static_cast<int>(i)});
    }
    return out;
  }
};

namespace detail {

/// Dense boundary block of the volume stiffness matrix.
inline Eigen::MatrixXd stiffness_boundary_block(const FemSystem& fs) {
  const auto& m = fs.mesh();
  const int nb = m.n_boundary_vertices();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(nb, nb);
  const auto& A = fs.stiffness().mat;
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      const int bi = m.boundary_index[it.row()];
      const int bj = m.boundary_index[it.col()];
      if (bi >= 0 && bj >= 0) S(bi, bj) += it.value();
    }
  return S;
}

}  // namespace detail

/// Discrete Dirichlet-to-Neumann operator: the boundary Schur complement
/// S = A_bb - A_bi A_ii^{-1} A_ib, dense on boundary slots. Symmetric
/// positive semidefinite with the constants as kernel.
inline Eigen::MatrixXd dtn_operator(const FemSystem& fs) {
  const int nb = fs.mesh().n_boundary_vertices();
  Eigen::MatrixXd S = detail::stiffness_boundary_block(fs);
  if (fs.n_interior() == 0) return S;
  const int block = 256;
  for (int j0 = 0; j0 < nb; j0 += block) {
    const int w = std::min(block, nb - j0);
    const Eigen::MatrixXd G = fs.a_ib().middleCols(j0, w);
    const Eigen::MatrixXd X = fs.solve_interior(G);
    S.middleCols(j0, w).noalias() -= fs.a_ib().transpose() * X;
  }
  // The Schur complement is symmetric in exact arithmetic; symmetrize the
  // solver roundoff so the dense eigensolver sees an exactly symmetric matrix.
  S = 0.5 * (S + S.transpose()).eval();
  return S;
}

/// k+1 smallest Steklov eigenpairs via the boundary Schur complement,
/// eigenvectors returned with their interior harmonic extension attached.
inline SpectralResult steklov_spectrum(const FemSystem& fs, int k) {
  const auto& m = fs.mesh();
  const int nb = m.n_boundary_vertices();
  if (k < 0 || k + 1 > nb)
    throw ContractError("steklov_spectrum: k must satisfy k + 1 <= boundary vertices");

  const Eigen::MatrixXd S = dtn_operator(fs);
  const Eigen::MatrixXd B = Eigen::MatrixXd(fs.surface_mass().mat);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, B);
  if (es.info() != Eigen::Success)
    throw NumericalError("steklov_spectrum: dense generalized eigensolver failed");

  SpectralResult res;
  res.problem = ProblemKind::Steklov;
  res.h = m.h;
  res.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + k + 1);
  res.boundary_vectors = es.eigenvectors().leftCols(k + 1);
  for (int j = 0; j <= k; ++j) {
    const Eigen::VectorXd x = res.boundary_vectors.col(j);
    const Eigen::VectorXd Kx = S * x;
    const double num = (Kx - res.eigenvalues[j] * (B * x)).norm();
    res.residual_norms.push_back(num / std::max(Kx.norm(), 1e-300));

    Eigen::VectorXd u = Eigen::VectorXd::Zero(m.n_vertices());
    for (int s = 0; s < nb; ++s) u[m.boundary_vertices[s]] = x[s];
    res.fields.push_back(fs.harmonic_extension(u));
  }
  return res;
}

/// k+1 smallest boundary Laplace-Beltrami eigenpairs: L z = lambda M z.
inline SpectralResult boundary_spectrum(const FemSystem& fs, int k) {
  const auto& m = fs.mesh();
  const int nb = m.n_boundary_vertices();
  if (k < 0 || k + 1 > nb)
    throw ContractError("boundary_spectrum: k must satisfy k + 1 <= boundary vertices");
  const Eigen::MatrixXd L = Eigen::MatrixXd(fs.surface_stiffness().mat);
  const Eigen::MatrixXd M = Eigen::MatrixXd(fs.surface_mass().mat);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(L, M);
  if (es.info() != Eigen::Success)
    throw NumericalError("boundary_spectrum: dense generalized eigensolver failed");
  SpectralResult res;
  res.problem = ProblemKind::BoundaryLaplacian;
  res.h = m.h;
  res.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + k + 1);
  res.boundary_vectors = es.eigenvectors().leftCols(k + 1);
  for (int j = 0; j <= k; ++j) {
    const Eigen::VectorXd x = res.boundary_vectors.col(j);
    const Eigen::VectorXd Kx = L * x;
    const double num = (Kx - res.eigenvalues[j] * (M * x)).norm();
    res.residual_norms.push_back(num / std::max(Kx.norm(), 1e-300));
  }
  return res;
}

/// Relative deviations of the Steklov eigenfunction identities
///   int_Sigma (d_nu f)^2 = sigma^2 int_Sigma f^2   (O(h) flux recovery)
///   int_Omega |grad f|^2 = sigma int_Sigma f^2     (exact in the Schur form)
/// for each pair j >= 1.
struct ConsistencyRecord {
  std::vector<double> flux_deviation;    // first identity, per pair
  std::vector<double> energy_deviation;  // second identity, per pair
};

inline ConsistencyRecord eigenfunction_consistency(const FemSystem& fs,
                                                   const SpectralResult& result) {
  if (result.problem != ProblemKind::Steklov)
    throw ContractError("eigenfunction_consistency: needs a Steklov result");
  ConsistencyRecord rec;
  for (size_t j = 1; j < result.fields.size(); ++j) {
    const auto F = fs.functionals(result.fields[j]);
    const double s = result.eigenvalues[j];
    const double den1 = s * s * F.boundary_l2;
    const double den2 = s * F.boundary_l2;
    rec.flux_deviation.push_back(std::abs(F.normal_derivative_l2 - den1) /
                                 std::max(den1, 1e-300));
    rec.energy_deviation.push_back(std::abs(F.dirichlet_energy - den2) /
                                   std::max(den2, 1e-300));
  }
  return rec;
}

/// Steklov Rayleigh quotient of boundary data after removing its boundary
/// mean. Always >= sigma_1(discrete) up to solver roundoff.
inline double rayleigh_steklov(const FemSystem& fs, const Eigen::VectorXd& boundary_data) {
  const auto& m = fs.mesh();
  Eigen::VectorXd f = boundary_data;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.n_vertices());
  const Eigen::VectorXd Bf = fs.boundary_mass().apply(f);
  const double total = fs.boundary_mass().quadratic_form(ones);
  const double mean = ones.dot(Bf) / total;
  f -= mean * ones;
  const double denom = fs.boundary_mass().quadratic_form(f);
  if (denom <= 1e-28 * total * boundary_data.cwiseAbs().maxCoeff() *
                   boundary_data.cwiseAbs().maxCoeff() ||
      denom == 0.0)
    throw DomainError("rayleigh_steklov: data is constant on the boundary");
  const Eigen::VectorXd u = fs.harmonic_extension(f);
  return fs.stiffness().quadratic_form(u) / denom;
}

/// Min-max upper bound from harmonically extended boundary eigenfunctions:
/// the largest eigenvalue of the (j+1)x(j+1) pencil (energy Gram, boundary
/// Gram) dominates sigma_j and is itself bounded by lambda_j / ((n-1)c).
struct MinMaxCheck {
  double bound = 0.0;      // largest eigenvalue of the pencil
  double margin = 0.0;     // lambda_j / ((n-1)c) - bound
  double lambda_j = 0.0;
  bool sigma_dominated = true;  // sigma_j(discrete) <= bound + tol (if supplied)
};

inline MinMaxCheck minmax_upper_check(const FemSystem& fs, int j, double c,
                                      const SpectralResult* steklov = nullptr) {
  const auto& m = fs.mesh();
  const SpectralResult bs = boundary_spectrum(fs, j);
  const int nb = m.n_boundary_vertices();

  Eigen::MatrixXd E(j + 1, j + 1), G(j + 1, j + 1);
  std::vector<Eigen::VectorXd> ext;
  for (int a = 0; a <= j; ++a) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(m.n_vertices());
    for (int s = 0; s < nb; ++s) u[m.boundary_vertices[s]] = bs.boundary_vectors(s, a);
    ext.push_back(fs.harmonic_extension(u));
  }
  const Eigen::MatrixXd Mb = Eigen::MatrixXd(fs.surface_mass().mat);
  for (int a = 0; a <= j; ++a)
    for (int b = 0; b <= j; ++b) {
      E(a, b) = ext[a].dot(fs.stiffness().apply(ext[b]));
      G(a, b) = bs.boundary_vectors.col(a).dot(Mb * bs.boundary_vectors.col(b));
    }
  E = 0.5 * (E + E.transpose()).eval();
  G = 0.5 * (G + G.transpose()).eval();

  Eigen::LLT<Eigen::MatrixXd> chol(G);
  if (chol.info() != Eigen::Success)
    throw NumericalError("minmax_upper_check: boundary Gram is rank deficient");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(E, G);
  if (es.info() != Eigen::Success)
    throw NumericalError("minmax_upper_check: pencil eigensolver failed");

  MinMaxCheck out;
  out.bound = es.eigenvalues()(j);
  out.lambda_j = bs.eigenvalues[j];
  out.margin = out.lambda_j / ((m.dim - 1) * c) - out.bound;
  if (steklov && j < static_cast<int>(steklov->eigenvalues.size())) {
    const double sj = steklov->eigenvalues[j];
    out.sigma_dominated = sj <= out.bound + 1e-10 * (std::abs(out.bound) + 1.0);
  }
  return out;
}

}  // namespace steklov
