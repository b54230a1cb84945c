// Copyright 2026 The tcnqs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tcnqs/lattice.hpp"

#include <sstream>
#include <stdexcept>

namespace tcnqs {

LatticeGeometry build_lattice(int L) {
  if (L < 2) {
    throw std::invalid_argument("build_lattice: side length must be >= 2, got " +
                                std::to_string(L));
  }
  LatticeGeometry g;
  g.side = L;
  g.n_edges = 2 * L * L - 2 * L;
  g.n_vertices = L * L;
  g.n_plaquettes = (L - 1) * (L - 1);

  g.vertex_edges.assign(g.n_vertices, {});
  for (int r = 0; r < L; ++r) {
    for (int c = 0; c < L; ++c) {
      auto& edges = g.vertex_edges[g.vertex_index(r, c)];
      if (c > 0) edges.push_back(g.horizontal_index(r, c - 1));
      if (c < L - 1) edges.push_back(g.horizontal_index(r, c));
      if (r > 0) edges.push_back(g.vertical_index(r - 1, c));
      if (r < L - 1) edges.push_back(g.vertical_index(r, c));
    }
  }

  g.plaquette_edges.reserve(g.n_plaquettes);
  for (int r = 0; r < L - 1; ++r) {
    for (int c = 0; c < L - 1; ++c) {
      g.plaquette_edges.push_back({g.horizontal_index(r, c),
                                   g.horizontal_index(r + 1, c),
                                   g.vertical_index(r, c),
                                   g.vertical_index(r, c + 1)});
    }
  }

  for (int v = 0; v < g.n_vertices; ++v) {
    if (static_cast<int>(g.vertex_edges[v].size()) == 4) {
      g.interior_vertices.push_back(v);
    }
  }
  return g;
}

namespace {

// Top-left anchor of a centered k x k square on a grid with m cells per side;
// ties broken toward the lower index.
int centered_anchor(int m, int k) { return (m - k) / 2; }

}  // namespace

StringSupport string_support(const LatticeGeometry& geom, int perimeter,
                             LatticeKind kind) {
  if (perimeter < 4 || perimeter % 4 != 0) {
    throw std::invalid_argument(
        "string_support: perimeter must be a positive multiple of 4, got " +
        std::to_string(perimeter));
  }
  const int L = geom.side;
  const int k = perimeter / 4;  // side length of the square, in edges
  const int max_side = (kind == LatticeKind::primal) ? L - 1 : L - 2;
  if (k > max_side) {
    throw std::invalid_argument(
        "string_support: perimeter " + std::to_string(perimeter) +
        " does not fit on L=" + std::to_string(L) +
        " (maximum feasible perimeter " + std::to_string(4 * max_side) + ")");
  }

  StringSupport out;
  out.kind = kind;
  out.perimeter = perimeter;
  out.closed_loop.reserve(perimeter);
  out.half_string.reserve(perimeter / 2);

  if (kind == LatticeKind::primal) {
    // Square of vertices (r0..r0+k, c0..c0+k); the loop is its boundary.
    const int r0 = centered_anchor(L, k + 1);
    const int c0 = centered_anchor(L, k + 1);
    for (int j = 0; j < k; ++j) {
      out.closed_loop.push_back(geom.horizontal_index(r0, c0 + j));
      out.closed_loop.push_back(geom.horizontal_index(r0 + k, c0 + j));
      out.closed_loop.push_back(geom.vertical_index(r0 + j, c0));
      out.closed_loop.push_back(geom.vertical_index(r0 + j, c0 + k));
    }
    // Half string: top row then right column, a connected open path from
    // (r0, c0) to (r0+k, c0+k).
    for (int j = 0; j < k; ++j) {
      out.half_string.push_back(geom.horizontal_index(r0, c0 + j));
    }
    for (int j = 0; j < k; ++j) {
      out.half_string.push_back(geom.vertical_index(r0 + j, c0 + k));
    }
  } else {
    // Square contour on the dual lattice through plaquette centers
    // (p0..p0+k, q0..q0+k); collected edges are the ones it crosses.
    const int m = L - 1;  // plaquette grid side
    const int p0 = centered_anchor(m, k + 1);
    const int q0 = centered_anchor(m, k + 1);
    for (int j = 0; j < k; ++j) {
      out.closed_loop.push_back(geom.vertical_index(p0, q0 + 1 + j));
      out.closed_loop.push_back(geom.vertical_index(p0 + k, q0 + 1 + j));
      out.closed_loop.push_back(geom.horizontal_index(p0 + 1 + j, q0));
      out.closed_loop.push_back(geom.horizontal_index(p0 + 1 + j, q0 + k));
    }
    // Half contour: top dual row then right dual column.
    for (int j = 0; j < k; ++j) {
      out.half_string.push_back(geom.vertical_index(p0, q0 + 1 + j));
    }
    for (int j = 0; j < k; ++j) {
      out.half_string.push_back(geom.horizontal_index(p0 + 1 + j, q0 + k));
    }
  }
  return out;
}

SpinConfiguration apply_vertex_flip(const LatticeGeometry& geom,
                                    const SpinConfiguration& s, int vertex) {
  if (vertex < 0 || vertex >= geom.n_vertices) {
    throw std::invalid_argument("apply_vertex_flip: vertex index out of range");
  }
  SpinConfiguration out = s;
  for (int e : geom.vertex_edges[vertex]) out[e] = -out[e];
  return out;
}

void validate_configuration(const LatticeGeometry& geom,
                            const SpinConfiguration& s) {
  if (static_cast<int>(s.size()) != geom.n_edges) {
    throw std::invalid_argument(
        "configuration length " + std::to_string(s.size()) +
        " does not match geometry with " + std::to_string(geom.n_edges) +
        " edges");
  }
  for (auto v : s) {
    if (v != 1 && v != -1) {
      throw std::invalid_argument("configuration values must be +1 or -1");
    }
  }
}

std::vector<int> central_plaquette_edges(const LatticeGeometry& geom) {
  const int m = geom.side - 1;
  const int p = centered_anchor(m, 1);
  const auto& e = geom.plaquette_edges[geom.plaquette_index(p, p)];
  return {e.begin(), e.end()};
}

std::string LatticeGeometry::describe() const {
  std::ostringstream os;
  os << "lattice L=" << side << ": " << n_edges << " edges, " << n_vertices
     << " vertices, " << n_plaquettes << " plaquettes\n";
  for (int v = 0; v < n_vertices; ++v) {
    os << "  vertex " << v << " (" << v / side << "," << v % side << "):";
    for (int e : vertex_edges[v]) os << " " << e;
    os << "\n";
  }
  for (int p = 0; p < n_plaquettes; ++p) {
    os << "  plaquette " << p << ":";
    for (int e : plaquette_edges[p]) os << " " << e;
    os << "\n";
  }
  return os.str();
}

}  // namespace tcnqs
