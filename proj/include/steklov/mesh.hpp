#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "steklov/errors.hpp"
#include "steklov/shape.hpp"

namespace steklov {

/// Conforming simplicial mesh (triangles for dim 2, tetrahedra for dim 3)
/// with oriented boundary facets. Immutable after construction.
struct SimplicialMesh {
  int dim = 2;
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> cells;    // 2D: last entry -1
  std::vector<std::array<int, 3>> bfacets;  // 2D: last entry -1
  std::vector<int> bfacet_cell;             // incident cell per boundary facet
  double h = 0.0;                           // max cell diameter
  std::optional<ShapeSpec> shape;

  std::vector<int> boundary_index;     // vertex id -> boundary slot, or -1
  std::vector<int> boundary_vertices;  // boundary slot -> vertex id

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_bfacets() const { return static_cast<int>(bfacets.size()); }
  int n_boundary_vertices() const { return static_cast<int>(boundary_vertices.size()); }
  int verts_per_cell() const { return dim + 1; }
  int verts_per_facet() const { return dim; }
  bool is_boundary_vertex(int v) const { return boundary_index[v] >= 0; }
};

// ---------------------------------------------------------------------------
// Elementary measures
// ---------------------------------------------------------------------------

inline double cell_volume(const SimplicialMesh& m, int c) {
  const auto& k = m.cells[c];
  if (m.dim == 2) {
    const Vec3 e1 = m.vertices[k[1]] - m.vertices[k[0]];
    const Vec3 e2 = m.vertices[k[2]] - m.vertices[k[0]];
    return 0.5 * (e1[0] * e2[1] - e1[1] * e2[0]);
  }
  const Vec3 e1 = m.vertices[k[1]] - m.vertices[k[0]];
  const Vec3 e2 = m.vertices[k[2]] - m.vertices[k[0]];
  const Vec3 e3 = m.vertices[k[3]] - m.vertices[k[0]];
  return e1.cross(e2).dot(e3) / 6.0;
}

inline double facet_measure(const SimplicialMesh& m, int f) {
  const auto& k = m.bfacets[f];
  if (m.dim == 2) return (m.vertices[k[1]] - m.vertices[k[0]]).norm();
  const Vec3 e1 = m.vertices[k[1]] - m.vertices[k[0]];
  const Vec3 e2 = m.vertices[k[2]] - m.vertices[k[0]];
  return 0.5 * e1.cross(e2).norm();
}

/// Outward unit normal of an (oriented) boundary facet.
inline Vec3 facet_normal(const SimplicialMesh& m, int f) {
  const auto& k = m.bfacets[f];
  if (m.dim == 2) {
    const Vec3 e = m.vertices[k[1]] - m.vertices[k[0]];
    Vec3 n(e[1], -e[0], 0.0);
    return n / n.norm();
  }
  const Vec3 e1 = m.vertices[k[1]] - m.vertices[k[0]];
  const Vec3 e2 = m.vertices[k[2]] - m.vertices[k[0]];
  Vec3 n = e1.cross(e2);
  return n / n.norm();
}

inline Vec3 cell_centroid(const SimplicialMesh& m, int c) {
  Vec3 s = Vec3::Zero();
  for (int i = 0; i <= m.dim; ++i) s += m.vertices[m.cells[c][i]];
  return s / (m.dim + 1);
}

inline Vec3 facet_centroid(const SimplicialMesh& m, int f) {
  Vec3 s = Vec3::Zero();
  for (int i = 0; i < m.dim; ++i) s += m.vertices[m.bfacets[f][i]];
  return s / m.dim;
}

inline double mesh_volume(const SimplicialMesh& m) {
  double v = 0.0;
  for (int c = 0; c < m.n_cells(); ++c) v += cell_volume(m, c);
  return v;
}

inline double boundary_measure(const SimplicialMesh& m) {
  double v = 0.0;
  for (int f = 0; f < m.n_bfacets(); ++f) v += facet_measure(m, f);
  return v;
}

// ---------------------------------------------------------------------------
// Construction helpers
// ---------------------------------------------------------------------------

namespace detail {

inline double max_cell_diameter(const SimplicialMesh& m) {
  double h = 0.0;
  for (const auto& k : m.cells)
    for (int i = 0; i <= m.dim; ++i)
      for (int j = i + 1; j <= m.dim; ++j)
        h = std::max(h, (m.vertices[k[i]] - m.vertices[k[j]]).norm());
  return h;
}

/// Orient cells positively, extract boundary facets (faces incident to one
/// cell), orient them outward, and fill the derived fields.
inline void finalize_mesh(SimplicialMesh& m) {
  for (int c = 0; c < m.n_cells(); ++c)
    if (cell_volume(m, c) < 0.0) std::swap(m.cells[c][0], m.cells[c][1]);
  for (int c = 0; c < m.n_cells(); ++c) {
    const double v = cell_volume(m, c);
    if (!(v > 0.0))
      throw MeshError("degenerate cell with nonpositive volume, cell " + std::to_string(c));
  }

  // Face counting.
  std::map<std::array<int, 3>, std::pair<int, int>> faces;  // sorted face -> (count, cell)
  const int nf = m.dim + 1;
  for (int c = 0; c < m.n_cells(); ++c) {
    for (int f = 0; f < nf; ++f) {
      std::array<int, 3> key{-1, -1, -1};
      int w = 0;
      for (int i = 0; i < nf; ++i)
        if (i != f) key[w++] = m.cells[c][i];
      std::sort(key.begin(), key.begin() + m.dim);
      auto it = faces.find(key);
      if (it == faces.end())
        faces.emplace(key, std::make_pair(1, c));
      else
        it->second.first++;
    }
  }
  m.bfacets.clear();
  m.bfacet_cell.clear();
  for (const auto& [key, cnt] : faces) {
    if (cnt.first != 1) continue;
    std::array<int, 3> fac = key;
    if (m.dim == 2) fac[2] = -1;
    m.bfacets.push_back(fac);
    m.bfacet_cell.push_back(cnt.second);
  }
  // Outward orientation: normal must point away from the incident cell.
  for (int f = 0; f < m.n_bfacets(); ++f) {
    const Vec3 d = facet_centroid(m, f) - cell_centroid(m, m.bfacet_cell[f]);
    if (facet_normal(m, f).dot(d) < 0.0) std::swap(m.bfacets[f][0], m.bfacets[f][1]);
  }

  m.boundary_index.assign(m.n_vertices(), -1);
  m.boundary_vertices.clear();
  for (const auto& bf : m.bfacets)
    for (int i = 0; i < m.dim; ++i)
      if (m.boundary_index[bf[i]] < 0) m.boundary_index[bf[i]] = 0;
  for (int v = 0; v < m.n_vertices(); ++v)
    if (m.boundary_index[v] == 0) {
      m.boundary_index[v] = static_cast<int>(m.boundary_vertices.size());
      m.boundary_vertices.push_back(v);
    }
  m.h = max_cell_diameter(m);
}

/// Project every boundary vertex onto the exact boundary surface.
inline void project_boundary_vertices(SimplicialMesh& m) {
  if (!m.shape) return;
  for (int v : m.boundary_vertices) {
    const auto pr = signed_projection(*m.shape, m.vertices[v]);
    m.vertices[v] = pr.foot;
  }
}

/// Unit-disk triangulation from concentric rings: ring i holds 6i vertices at
/// radius i/m; annuli are triangulated by an angular two-pointer merge.
inline void unit_disk_mesh(int m_rings, std::vector<Vec3>& verts,
                           std::vector<std::array<int, 4>>& cells) {
  verts.clear();
  cells.clear();
  verts.push_back(Vec3::Zero());
  std::vector<int> ring_start(m_rings + 1, 0);
  for (int i = 1; i <= m_rings; ++i) {
    ring_start[i] = static_cast<int>(verts.size());
    const int cnt = 6 * i;
    const double r = static_cast<double>(i) / m_rings;
    for (int k = 0; k < cnt; ++k) {
      const double th = 2.0 * M_PI * k / cnt;
      verts.push_back(Vec3(r * std::cos(th), r * std::sin(th), 0.0));
    }
  }
  auto tri = [&](int a, int b, int c) { cells.push_back({a, b, c, -1}); };
  for (int k = 0; k < 6; ++k) tri(0, ring_start[1] + k, ring_start[1] + (k + 1) % 6);
  for (int i = 2; i <= m_rings; ++i) {
    const int p = 6 * (i - 1), q = 6 * i;
    const int si = ring_start[i - 1], so = ring_start[i];
    int j = 0, k = 0;
    while (j < p || k < q) {
      bool advance_outer;
      if (j == p)
        advance_outer = true;
      else if (k == q)
        advance_outer = false;
      else
        advance_outer = (k + 1) * p <= (j + 1) * q;  // compare angles (k+1)/q vs (j+1)/p
      if (advance_outer) {
        tri(si + j % p, so + k, so + (k + 1) % q);
        ++k;
      } else {
        tri(si + j, si + (j + 1) % p, so + k % q);
        ++j;
      }
    }
  }
}

/// Unit icosphere triangulation: `sub` midpoint subdivisions of an
/// icosahedron, vertices normalized to the unit sphere.
inline void icosphere(int sub, std::vector<Vec3>& verts,
                      std::vector<std::array<int, 3>>& faces) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                         {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                         {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<std::array<int, 3>> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},
      {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},   {3, 4, 2},
      {3, 2, 6},  {3, 6, 8},  {3, 8, 9},   {4, 9, 5},  {2, 4, 11},  {6, 2, 10},
      {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < sub; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      Vec3 p = (v[a] + v[b]).normalized();
      const int idx = static_cast<int>(v.size());
      v.push_back(p);
      mid.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> nf;
    nf.reserve(f.size() * 4);
    for (const auto& t : f) {
      const int a = midpoint(t[0], t[1]);
      const int b = midpoint(t[1], t[2]);
      const int c = midpoint(t[2], t[0]);
      nf.push_back({t[0], a, c});
      nf.push_back({t[1], b, a});
      nf.push_back({t[2], c, b});
      nf.push_back({a, b, c});
    }
    f.swap(nf);
  }
  verts = std::move(v);
  faces = std::move(f);
}

/// Unit-ball tetrahedralization: L concentric icosphere shells sharing one
/// connectivity, a tet fan from the center to shell 1, and prisms between
/// shells split into 3 tets each by a global-index diagonal rule (conforming).
inline void unit_ball_mesh(int sub, int L, std::vector<Vec3>& verts,
                           std::vector<std::array<int, 4>>& cells) {
  std::vector<Vec3> sphere;
  std::vector<std::array<int, 3>> faces;
  icosphere(sub, sphere, faces);
  const int Ns = static_cast<int>(sphere.size());

  verts.clear();
  cells.clear();
  verts.push_back(Vec3::Zero());
  for (int j = 1; j <= L; ++j) {
    const double r = static_cast<double>(j) / L;
    for (const auto& p : sphere) verts.push_back(p * r);
  }
  auto idx = [&](int shell, int t) { return 1 + (shell - 1) * Ns + t; };

  for (const auto& t : faces)
    cells.push_back({0, idx(1, t[0]), idx(1, t[1]), idx(1, t[2])});

  for (int j = 1; j < L; ++j) {
    for (const auto& t : faces) {
      // Sort the prism columns by within-shell index: every quad face then
      // gets the diagonal bottom(min column) -> top(max column), which two
      // neighboring prisms agree on.
      std::array<int, 3> col = t;
      std::sort(col.begin(), col.end());
      const int p0 = idx(j, col[0]), p1 = idx(j, col[1]), p2 = idx(j, col[2]);
      const int q0 = idx(j + 1, col[0]), q1 = idx(j + 1, col[1]), q2 = idx(j + 1, col[2]);
      cells.push_back({p0, p1, p2, q2});
      cells.push_back({p0, p1, q2, q1});
      cells.push_back({p0, q1, q2, q0});
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Generation / refinement
// ---------------------------------------------------------------------------

/// Mesh an analytic shape with realized h <= 1.5 * target_h.
inline SimplicialMesh generate(const ShapeSpec& shape, double target_h) {
  shape.require_analytic();
  if (!(target_h > 0.0) || target_h >= shape.diameter() / 4.0)
    throw ContractError("generate: need 0 < target_h < diameter/4");

  const double a0 = shape.max_axis();
  const double unit_h = target_h / a0;  // target in the unit-ball chart

  SimplicialMesh m;
  m.dim = shape.dim();
  m.shape = shape;

  auto map_to_shape = [&](std::vector<Vec3>& verts) {
    for (auto& p : verts) {
      Vec3 q = Vec3::Zero();
      for (int i = 0; i < m.dim; ++i) q[i] = shape.center()[i] + shape.axis(i) * p[i];
      p = q;
    }
  };

  if (m.dim == 2) {
    int rings = std::max(1, static_cast<int>(std::ceil(1.25 / unit_h)));
    for (int attempt = 0; attempt < 8; ++attempt) {
      if (3.0 * rings * (rings + 1.0) + 1.0 > 6e6)
        throw MeshError("generate: target_h too small, vertex budget exceeded");
      detail::unit_disk_mesh(rings, m.vertices, m.cells);
      map_to_shape(m.vertices);
      detail::finalize_mesh(m);
      if (m.h <= 1.5 * target_h) return m;
      rings = static_cast<int>(std::ceil(rings * 1.3)) + 1;
    }
    throw MeshError("generate: could not reach target mesh size");
  }

  int sub = std::max(0, static_cast<int>(std::ceil(std::log2(1.0515 / unit_h))));
  int L = std::max(1, static_cast<int>(std::ceil(1.0 / unit_h)));
  for (int attempt = 0; attempt < 8; ++attempt) {
    const double nv = (10.0 * std::pow(4.0, sub) + 2.0) * L + 1.0;
    if (nv > 6e6) throw MeshError("generate: target_h too small, vertex budget exceeded");
    detail::unit_ball_mesh(sub, L, m.vertices, m.cells);
    map_to_shape(m.vertices);
    detail::finalize_mesh(m);
    if (m.h <= 1.5 * target_h) return m;
    // Grow resolution in the direction that is lagging.
    const double edge = 1.0515 * a0 / std::pow(2.0, sub);
    const double dr = a0 / L;
    if (edge > dr)
      ++sub;
    else
      L = static_cast<int>(std::ceil(L * 1.3)) + 1;
  }
  throw MeshError("generate: could not reach target mesh size");
}

/// Uniform red refinement: each cell splits into 2^dim children; new boundary
/// vertices are projected onto the exact surface when a shape is attached.
inline SimplicialMesh refine(const SimplicialMesh& old) {
  SimplicialMesh m;
  m.dim = old.dim;
  m.shape = old.shape;
  m.vertices = old.vertices;

  std::map<std::pair<int, int>, int> mid;
  auto midpoint = [&](int a, int b) {
    auto key = std::minmax(a, b);
    auto it = mid.find(key);
    if (it != mid.end()) return it->second;
    const int idx = static_cast<int>(m.vertices.size());
    m.vertices.push_back(0.5 * (old.vertices[a] + old.vertices[b]));
    mid.emplace(key, idx);
    return idx;
  };

  if (m.dim == 2) {
    m.cells.reserve(old.cells.size() * 4);
    for (const auto& t : old.cells) {
      const int a = midpoint(t[0], t[1]);
      const int b = midpoint(t[1], t[2]);
      const int c = midpoint(t[2], t[0]);
      m.cells.push_back({t[0], a, c, -1});
      m.cells.push_back({t[1], b, a, -1});
      m.cells.push_back({t[2], c, b, -1});
      m.cells.push_back({a, b, c, -1});
    }
  } else {
    m.cells.reserve(old.cells.size() * 8);
    for (const auto& t : old.cells) {
      const int m01 = midpoint(t[0], t[1]), m02 = midpoint(t[0], t[2]),
                m03 = midpoint(t[0], t[3]), m12 = midpoint(t[1], t[2]),
                m13 = midpoint(t[1], t[3]), m23 = midpoint(t[2], t[3]);
      m.cells.push_back({t[0], m01, m02, m03});
      m.cells.push_back({t[1], m01, m12, m13});
      m.cells.push_back({t[2], m02, m12, m23});
      m.cells.push_back({t[3], m03, m13, m23});
      // Central octahedron: split along the shortest of the three diagonals.
      auto d2 = [&](int a, int b) {
        return (m.vertices[a] - m.vertices[b]).squaredNorm();
      };
      const double dA = d2(m01, m23), dB = d2(m02, m13), dC = d2(m03, m12);
      if (dA <= dB && dA <= dC) {
        const int ring[4] = {m02, m03, m13, m12};
        for (int i = 0; i < 4; ++i)
          m.cells.push_back({m01, m23, ring[i], ring[(i + 1) % 4]});
      } else if (dB <= dC) {
        const int ring[4] = {m01, m03, m23, m12};
        for (int i = 0; i < 4; ++i)
          m.cells.push_back({m02, m13, ring[i], ring[(i + 1) % 4]});
      } else {
        const int ring[4] = {m01, m02, m23, m13};
        for (int i = 0; i < 4; ++i)
          m.cells.push_back({m03, m12, ring[i], ring[(i + 1) % 4]});
      }
    }
  }

  detail::finalize_mesh(m);
  if (m.shape) {
    detail::project_boundary_vertices(m);
    detail::finalize_mesh(m);  // re-derive h and orientations after the snap
  }
  return m;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Check all SimplicialMesh invariants; throws MeshError with a description
/// of the first violation.
inline void validate(const SimplicialMesh& m) {
  for (int c = 0; c < m.n_cells(); ++c)
    if (!(cell_volume(m, c) > 0.0))
      throw MeshError("cell " + std::to_string(c) + " has nonpositive volume");

  // The boundary complex must be a closed (dim-1)-manifold: every ridge of a
  // boundary facet is shared by exactly two boundary facets.
  std::map<std::array<int, 2>, int> ridges;
  for (const auto& bf : m.bfacets) {
    if (m.dim == 2) {
      ridges[{bf[0], -1}]++;
      ridges[{bf[1], -1}]++;
    } else {
      for (int i = 0; i < 3; ++i) {
        auto e = std::minmax(bf[i], bf[(i + 1) % 3]);
        ridges[{e.first, e.second}]++;
      }
    }
  }
  for (const auto& [r, cnt] : ridges)
    if (cnt != 2) throw MeshError("boundary not closed");

  for (int f = 0; f < m.n_bfacets(); ++f) {
    const Vec3 d = facet_centroid(m, f) - cell_centroid(m, m.bfacet_cell[f]);
    if (!(facet_normal(m, f).dot(d) > 0.0))
      throw MeshError("boundary facet " + std::to_string(f) + " not outward oriented");
  }

  if (m.shape) {
    for (int v : m.boundary_vertices) {
      const double lvl = m.shape->level(m.vertices[v]);
      if (std::abs(lvl - 1.0) > 1e-10)
        throw MeshError("boundary vertex " + std::to_string(v) +
                        " off the boundary level set");
    }
  }
}

}  // namespace steklov
