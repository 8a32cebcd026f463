#pragma once

#include <charconv>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "steklov/mesh.hpp"

namespace steklov {

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Plain-text mesh format, newline delimited:
///   line 1: n n_vertices n_cells n_bfacets
///   then vertex lines (n floats), cell lines (n+1 zero-based indices) and
///   boundary facet lines (n zero-based indices, outward oriented).
/// Lines starting with '#' are comments.
inline std::string export_mesh(const SimplicialMesh& m) {
  std::ostringstream os;
  os << m.dim << ' ' << m.n_vertices() << ' ' << m.n_cells() << ' ' << m.n_bfacets()
     << '\n';
  for (const auto& p : m.vertices) {
    os << detail::format_double(p[0]) << ' ' << detail::format_double(p[1]);
    if (m.dim == 3) os << ' ' << detail::format_double(p[2]);
    os << '\n';
  }
  for (const auto& c : m.cells) {
    for (int i = 0; i <= m.dim; ++i) os << (i ? " " : "") << c[i];
    os << '\n';
  }
  for (const auto& f : m.bfacets) {
    for (int i = 0; i < m.dim; ++i) os << (i ? " " : "") << f[i];
    os << '\n';
  }
  return os.str();
}

inline SimplicialMesh import_mesh(const std::string& text) {
  std::istringstream is(text);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] == '#') continue;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    lines.push_back(line);
  }
  if (lines.empty()) throw ParseError("mesh import: empty input");

  auto parse_ints = [](const std::string& s, int count, const char* what) {
    std::istringstream ls(s);
    std::vector<long long> v(count);
    for (int i = 0; i < count; ++i)
      if (!(ls >> v[i])) throw ParseError(std::string("mesh import: malformed ") + what);
    return v;
  };

  const auto head = parse_ints(lines[0], 4, "header");
  const int dim = static_cast<int>(head[0]);
  const long long nv = head[1], nc = head[2], nb = head[3];
  if ((dim != 2 && dim != 3) || nv < dim + 1 || nc < 1 || nb < dim)
    throw ParseError("mesh import: malformed header");
  if (static_cast<long long>(lines.size()) != 1 + nv + nc + nb)
    throw ParseError("mesh import: wrong number of data lines");

  SimplicialMesh m;
  m.dim = dim;
  m.vertices.reserve(nv);
  for (long long i = 0; i < nv; ++i) {
    std::istringstream ls(lines[1 + i]);
    Vec3 p = Vec3::Zero();
    for (int d = 0; d < dim; ++d)
      if (!(ls >> p[d])) throw ParseError("mesh import: malformed vertex line");
    m.vertices.push_back(p);
  }
  for (long long i = 0; i < nc; ++i) {
    const auto v = parse_ints(lines[1 + nv + i], dim + 1, "cell line");
    std::array<int, 4> c{-1, -1, -1, -1};
    for (int d = 0; d <= dim; ++d) {
      if (v[d] < 0 || v[d] >= nv) throw ParseError("mesh import: cell index out of range");
      c[d] = static_cast<int>(v[d]);
    }
    m.cells.push_back(c);
  }
  for (long long i = 0; i < nb; ++i) {
    const auto v = parse_ints(lines[1 + nv + nc + i], dim, "facet line");
    std::array<int, 3> f{-1, -1, -1};
    for (int d = 0; d < dim; ++d) {
      if (v[d] < 0 || v[d] >= nv) throw ParseError("mesh import: facet index out of range");
      f[d] = static_cast<int>(v[d]);
    }
    m.bfacets.push_back(f);
  }

  // Attach each facet to its incident cell without reordering anything.
  std::map<std::array<int, 3>, int> cell_faces;
  for (int c = 0; c < m.n_cells(); ++c) {
    for (int f = 0; f <= dim; ++f) {
      std::array<int, 3> key{-1, -1, -1};
      int w = 0;
      for (int i = 0; i <= dim; ++i)
        if (i != f) key[w++] = m.cells[c][i];
      std::sort(key.begin(), key.begin() + dim);
      cell_faces[key] = c;
    }
  }
  m.bfacet_cell.resize(m.n_bfacets());
  for (int f = 0; f < m.n_bfacets(); ++f) {
    std::array<int, 3> key = m.bfacets[f];
    std::sort(key.begin(), key.begin() + dim);
    if (dim == 2) key[2] = -1;
    auto it = cell_faces.find(key);
    if (it == cell_faces.end())
      throw ParseError("mesh import: boundary facet matches no cell face");
    m.bfacet_cell[f] = it->second;
  }

  m.boundary_index.assign(m.n_vertices(), -1);
  for (const auto& bf : m.bfacets)
    for (int i = 0; i < dim; ++i)
      if (m.boundary_index[bf[i]] < 0) m.boundary_index[bf[i]] = 0;
  for (int v = 0; v < m.n_vertices(); ++v)
    if (m.boundary_index[v] == 0) {
      m.boundary_index[v] = static_cast<int>(m.boundary_vertices.size());
      m.boundary_vertices.push_back(v);
    }
  m.h = detail::max_cell_diameter(m);

  validate(m);
  return m;
}

/// Mesh text plus one scalar value line per vertex.
inline std::string export_field(const SimplicialMesh& m, const Eigen::VectorXd& values) {
  if (values.size() != m.n_vertices())
    throw ContractError("export_field: value count must equal vertex count");
  std::string out = export_mesh(m);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    out += detail::format_double(values[i]);
    out += '\n';
  }
  return out;
}

}  // namespace steklov
