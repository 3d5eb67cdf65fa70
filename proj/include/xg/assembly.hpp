#pragma once

#include <Eigen/Sparse>
#include <iosfwd>

#include "xg/spaces.hpp"

namespace xg {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Parallel uses OpenMP with per-entity buffers merged in entity order, so
/// results are identical to Serial bit for bit; Serial is the plain reference
/// loop kept for testing and benchmarking.
enum class AssemblyMode { Serial, Parallel };

/// Averages and jumps of scalar traces v and normal fluxes q.n_e on one edge,
/// in the fixed n_e orientation (the plus cell is the one n_e exits, so
/// n+ = n_e). Boundary edges use only the plus-side values:
/// Dirichlet: {v}=v, [v]_e=v, {q}_e=q.n, [q]=0;
/// Neumann:   {v}=v, [v]_e=0, {q}_e=q.n, [q]=q.n.
struct EdgeTraces {
  double avg_v = 0.0;    // {v}
  double jump_v_e = 0.0; // [v]_e
  double avg_q_e = 0.0;  // {q}_e
  double jump_q = 0.0;   // [q]
};

EdgeTraces dg_average_jump(const EdgeInfo& edge, double v_plus, double v_minus,
                           double qn_plus, double qn_minus);

/// One symmetric indefinite system over the (p, pcheck, u, ucheck) ordering:
/// [[A, B^T], [B, -C]] acting on (ptilde, utilde).
struct BlockSystem {
  Spaces spaces;
  SpMat M;
  Eigen::VectorXd rhs;
};

/// All blocks are returned as total x total sparse matrices in global
/// indexing so they add directly.
SpMat assemble_a(const Mesh2D& mesh, const Spaces& spaces,
                 const ProblemData& data, const MethodConfig& config,
                 AssemblyMode mode = AssemblyMode::Parallel);
SpMat assemble_c(const Mesh2D& mesh, const Spaces& spaces,
                 const MethodConfig& config,
                 AssemblyMode mode = AssemblyMode::Parallel);
/// Coupling of utilde trial DOFs (columns) to qtilde test DOFs (rows),
/// in gradient form (grad_h u, q) - <[u]_e, {q}_e> + <ucheck, [q]>
/// - <[u]_e, qcheck> or the integration-by-parts divergence form
/// -(u, div_h q) + <{u}, [q]> + <ucheck, [q]> - <[u]_e, qcheck>.
/// The two agree entrywise.
SpMat assemble_b_grad(const Mesh2D& mesh, const Spaces& spaces,
                      const MethodConfig& config,
                      AssemblyMode mode = AssemblyMode::Parallel);
SpMat assemble_b_div(const Mesh2D& mesh, const Spaces& spaces,
                     const MethodConfig& config,
                     AssemblyMode mode = AssemblyMode::Parallel);
/// (-<g_D, q.n>_GD, -<g_D, qcheck>_GD, -(f,v)+<g_N,v>_GN, <g_N, vcheck>_GN)
Eigen::VectorXd assemble_rhs(const Mesh2D& mesh, const Spaces& spaces,
                             const ProblemData& data,
                             const MethodConfig& config,
                             AssemblyMode mode = AssemblyMode::Parallel);
BlockSystem assemble_system(const Mesh2D& mesh, const Spaces& spaces,
                            const ProblemData& data,
                            const MethodConfig& config,
                            AssemblyMode mode = AssemblyMode::Parallel);

/// Moment matrix T of an edge jump against the physical edge basis of an
/// edge space: T maps cell-field coefficients to the edge-space coefficients
/// of the projected jump. For Pcheck the jump is [u]_e of scalar traces
/// (zero on Neumann edges); for Ucheck it is [q] of normal fluxes (zero on
/// Dirichlet edges). Rows are indexed by the check DofMap, columns by the
/// cell field's DofMap (both local to the field).
SpMat jump_moment_matrix(const Mesh2D& mesh, const Spaces& spaces,
                         FieldKind check_field);

/// Gram matrices of the regime's norm pair, block diagonal over the global
/// ordering: n_ptilde carries the ptilde norm on rows/cols [0, off_u) and
/// n_utilde the utilde norm on [off_u, total). Both are returned total-sized.
struct NormMatrices {
  PenaltyRegime regime = PenaltyRegime::GradBased;
  SpMat n_ptilde;
  SpMat n_utilde;
  SpMat whole() const { return n_ptilde + n_utilde; }
};

/// data supplies the coefficient c = alpha^{-1} weighting the p mass term;
/// null means identity.
NormMatrices assemble_norm_grams(const Mesh2D& mesh, const Spaces& spaces,
                                 const MethodConfig& config,
                                 PenaltyRegime regime,
                                 const ProblemData* data = nullptr,
                                 AssemblyMode mode = AssemblyMode::Parallel);

/// Coefficient vector split into the four fields with cellwise evaluators.
struct SolutionFields {
  const Mesh2D* mesh = nullptr;
  const Spaces* spaces = nullptr;
  Eigen::VectorXd x;

  Eigen::VectorXd seg_p() const;
  Eigen::VectorXd seg_pcheck() const;
  Eigen::VectorXd seg_u() const;
  Eigen::VectorXd seg_ucheck() const;

  /// u_h values/gradients at reference points of one cell (physical frame).
  void eval_u(int cell, const Eigen::MatrixXd& ref_pts, Eigen::VectorXd& val,
              Eigen::VectorXd& gx, Eigen::VectorXd& gy) const;
  /// p_h components and divergence at reference points of one cell.
  void eval_p(int cell, const Eigen::MatrixXd& ref_pts, Eigen::VectorXd& vx,
              Eigen::VectorXd& vy, Eigen::VectorXd& div) const;
  /// Edge-field values at parameters t in [0,1] along one edge; zero vector
  /// on constrained/trivial edges.
  Eigen::VectorXd eval_ucheck(int edge, const Eigen::VectorXd& t) const;
  Eigen::VectorXd eval_pcheck(int edge, const Eigen::VectorXd& t) const;
};

/// Coordinate-format text dump (row col value per line) for cross-checking.
void dump_coo(const SpMat& m, std::ostream& os);

/// Quadrature exactness used for all forms and data terms of a config.
int form_quadrature_degree(const MethodConfig& config);

}  // namespace xg
