#pragma once

#include "xg/assembly.hpp"

namespace xg {

/// A statically condensed variant of a 4-field system. The reduced matrix
/// acts on the kept unknowns; reconstruct() maps a reduced solution back to
/// a full-length coefficient vector in the original (p, pcheck, u, ucheck)
/// ordering, recovering every eliminated field.
struct ReducedSystem {
  std::string name;
  int full_size = 0;
  SpMat M;
  Eigen::VectorXd rhs;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> reconstruct;
};

/// Moment matrix of the edge average against the physical edge basis of a
/// check space: for Ucheck the average {u} of scalar traces, for Pcheck the
/// normal average {q}_e. Rows indexed by the check DofMap, columns by the
/// cell field's DofMap (both field-local).
SpMat avg_moment_matrix(const Mesh2D& mesh, const Spaces& spaces,
                        FieldKind check_field);

/// Generic Schur elimination of the given global indices; requires the
/// eliminated block of M to be diagonal with nonzero entries (throws
/// otherwise). The reduced matrix keeps the remaining indices in ascending
/// order.
ReducedSystem schur_eliminate(const SpMat& M, const Eigen::VectorXd& rhs,
                              std::vector<int> elim, const std::string& name);

/// Schur-complement eliminations on the diagonal edge-mass blocks. Each is
/// the identity transform when the corresponding space is trivial.
ReducedSystem eliminate_pcheck(const Mesh2D& mesh, const BlockSystem& system);
ReducedSystem eliminate_ucheck(const Mesh2D& mesh, const BlockSystem& system);
ReducedSystem eliminate_both(const Mesh2D& mesh, const BlockSystem& system);

/// Hybridization onto uhat = projected average of u plus ucheck: eliminates
/// pcheck, changes variables, then condenses the cell-local (p, u) blocks,
/// leaving a symmetric positive definite system of dimension dim Vcheck.
/// Refuses (throws std::invalid_argument naming the condition) unless
/// Q_h.n_e and V_h traces lie in Vcheck_h and eta = tau^{-1}/4 on every
/// active edge.
ReducedSystem hybridize_uhat(const Mesh2D& mesh, const BlockSystem& system);

/// The mirrored transform onto phat = projected normal average of p plus
/// pcheck, the (p, phat, u) form. Requires Q_h.n_e traces in Qcheck_h and
/// tau = eta^{-1}/4 on active edges.
ReducedSystem assemble_wg_phat(const Mesh2D& mesh, const BlockSystem& system);

}  // namespace xg
