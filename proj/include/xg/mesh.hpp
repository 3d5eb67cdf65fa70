#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

#include "xg/basis.hpp"

namespace xg {

enum class EdgeTag { Interior, Dirichlet, Neumann };

/// Mesh edge with a globally fixed unit normal n_e. For interior edges the
/// normal points out of the plus cell (plus = lower cell index); for boundary
/// edges it is the outward normal of the domain.
struct EdgeInfo {
  int v0 = -1, v1 = -1;          // endpoint vertex indices, v0 < v1
  int cell_plus = -1;            // n_e exits this cell
  int cell_minus = -1;           // -1 on boundary
  Vec2 normal = Vec2::Zero();
  double h = 0.0;                // edge length
  EdgeTag tag = EdgeTag::Interior;

  bool is_boundary() const { return cell_minus < 0; }
};

/// Conforming triangulation with oriented edges and boundary partitioning.
/// Immutable after construction; safe for concurrent reads.
struct Mesh2D {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> cells;        // counterclockwise triples
  std::vector<EdgeInfo> edges;
  std::vector<std::array<int, 3>> cell_edges;   // local edge i = (i+1,i+2)
  std::vector<double> cell_h;                   // diameters

  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }
  int n_vertices() const { return static_cast<int>(vertices.size()); }

  double cell_area(int c) const;
  CellGeom cell_geom(int c) const;
  /// Outward unit normal of cell c on its local edge le.
  Vec2 outward_normal(int c, int le) const;
  /// Midpoint of an edge.
  Vec2 edge_midpoint(int e) const;
  double total_area() const;
  double min_angle() const;
};

/// Structured triangulation of the unit square: n x n grid squares, each
/// split along the (lower-left, upper-right) diagonal. All boundary edges
/// start out Dirichlet.
Mesh2D build_structured_unit_square(int n);

/// Single reference triangle {(0,0),(1,0),(0,1)}, all edges Dirichlet.
Mesh2D build_single_triangle();

/// Uniform midpoint refinement; each cell splits into 4 congruent children,
/// boundary children inherit the parent edge tag.
Mesh2D refine_uniform(const Mesh2D& mesh);

/// Retag boundary edges by a predicate on edge midpoints. Rejects an
/// all-Neumann result.
Mesh2D tag_boundary(const Mesh2D& mesh,
                    const std::function<EdgeTag(const Vec2&)>& predicate);

/// Plain-text dump: `v x y`, `c i j k`, `e i j tag` lines.
void dump_mesh(const Mesh2D& mesh, std::ostream& os);

/// Consistency checks used by constructors and tests; throws on violation.
void validate_mesh(const Mesh2D& mesh);

}  // namespace xg
