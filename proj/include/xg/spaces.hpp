#pragma once

#include "xg/problem.hpp"

namespace xg {

enum class FieldKind { P, Pcheck, U, Ucheck };

/// DOF enumeration for one field; entities are cells (P, U) or edges
/// (Pcheck, Ucheck). Constrained edges (Ucheck on Dirichlet, Pcheck on
/// Neumann) contribute zero DOFs.
struct DofMap {
  FieldKind kind = FieldKind::U;
  std::vector<int> offset;  // per entity; -1 if no DOFs
  std::vector<int> count;
  int total = 0;
};

/// The four DOF maps plus the bases behind them, and the global block
/// ordering (p, pcheck, u, ucheck).
struct Spaces {
  MethodConfig config;
  DofMap p, pcheck, u, ucheck;
  BasisSet basis_p;       // vector family (empty when deg_p < 0)
  BasisSet basis_u;       // scalar
  EdgeBasis basis_pcheck; // degree -1 = trivial
  EdgeBasis basis_ucheck;
  int off_p = 0, off_pcheck = 0, off_u = 0, off_ucheck = 0, total = 0;

  int global_p(int cell, int i) const { return off_p + p.offset[cell] + i; }
  int global_pcheck(int edge, int i) const {
    return off_pcheck + pcheck.offset[edge] + i;
  }
  int global_u(int cell, int i) const { return off_u + u.offset[cell] + i; }
  int global_ucheck(int edge, int i) const {
    return off_ucheck + ucheck.offset[edge] + i;
  }
  int dim_ptilde() const { return p.total + pcheck.total; }
  int dim_utilde() const { return u.total + ucheck.total; }
};

Spaces build_spaces(const Mesh2D& mesh, const MethodConfig& config);

/// Per-edge L2 projection onto an edge space (Pcheck or Ucheck layout).
/// With the orthonormal edge basis this is a moment evaluation.
struct EdgeProjector {
  const Mesh2D* mesh = nullptr;
  const DofMap* dofmap = nullptr;
  EdgeBasis basis;
};

EdgeProjector make_edge_projector(const Mesh2D& mesh, const Spaces& spaces,
                                  FieldKind check_field);

/// Coefficients of the edgewise L2-best approximation of a trace-valued
/// function; zero on constrained edges. The function receives the edge index
/// and the physical point.
Eigen::VectorXd project_edge(
    const EdgeProjector& projector,
    const std::function<double(int, const Vec2&)>& trace_fn,
    int quad_degree = 12);

}  // namespace xg
