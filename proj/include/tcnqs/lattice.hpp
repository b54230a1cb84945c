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

#ifndef TCNQS_LATTICE_HPP
#define TCNQS_LATTICE_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tcnqs {

// One spin value (+1/-1) per edge of the lattice.
using SpinConfiguration = std::vector<std::int8_t>;

enum class LatticeKind { primal, dual };

// Open-boundary L x L square lattice with qubits on edges.
//
// Edge indexing is fixed: horizontal edges row-major first, then vertical
// edges row-major.  Horizontal edge (r, c) with r in [0, L), c in [0, L-1)
// joins vertices (r, c)-(r, c+1); vertical edge (r, c) with r in [0, L-1),
// c in [0, L) joins (r, c)-(r+1, c).
struct LatticeGeometry {
  int side = 0;  // L
  int n_edges = 0;
  int n_vertices = 0;
  int n_plaquettes = 0;

  // vertex index r*L + c -> incident edges (2, 3 or 4 of them)
  std::vector<std::vector<int>> vertex_edges;
  // plaquette index r*(L-1) + c -> bounding edges {top, bottom, left, right}
  std::vector<std::array<int, 4>> plaquette_edges;
  // vertices with all 4 incident edges present
  std::vector<int> interior_vertices;

  int horizontal_count() const { return side * (side - 1); }
  int horizontal_index(int r, int c) const { return r * (side - 1) + c; }
  int vertical_index(int r, int c) const {
    return horizontal_count() + r * side + c;
  }
  int vertex_index(int r, int c) const { return r * side + c; }
  int plaquette_index(int r, int c) const { return r * (side - 1) + c; }

  std::string describe() const;
};

// Builds the geometry for side length L >= 2.  Pure function: identical L
// gives identical index maps.
LatticeGeometry build_lattice(int L);

// Closed loop C plus the open half-string C-tilde used by the string order
// parameter.  For kind == primal the loop runs along lattice edges; for
// kind == dual it is the set of edges crossed by a square contour on the
// dual lattice.
struct StringSupport {
  std::vector<int> closed_loop;  // C, perimeter edges
  std::vector<int> half_string;  // C-tilde, ceil(|C|/2) edges
  LatticeKind kind = LatticeKind::primal;
  int perimeter = 0;
};

// perimeter must be a positive multiple of 4 and the loop must fit; the
// square is centered with ties broken toward lower row/column index.
StringSupport string_support(const LatticeGeometry& geom, int perimeter,
                             LatticeKind kind);

// Returns s with all edges incident to vertex v negated.  Involutive.
SpinConfiguration apply_vertex_flip(const LatticeGeometry& geom,
                                    const SpinConfiguration& s, int vertex);

// Throws std::invalid_argument when s does not match the geometry or holds
// values other than +1/-1.
void validate_configuration(const LatticeGeometry& geom,
                            const SpinConfiguration& s);

// The 4 bounding edges of the central-most plaquette (ties toward lower
// index); the default subsystem for entropy measurements.
std::vector<int> central_plaquette_edges(const LatticeGeometry& geom);

}  // namespace tcnqs

#endif  // TCNQS_LATTICE_HPP
