#pragma once

#include <string>

#include "xg/assembly.hpp"

namespace xg {

/// Direct-solve outcome with an independently recomputed residual; failures
/// are reported, not thrown, so misconfigured systems can be diagnosed.
struct SolveReport {
  bool ok = false;
  Eigen::VectorXd x;
  double rel_residual = 0.0;
  std::string message;
};

/// Sparse LU with partial pivoting; succeeds iff the factorization completes
/// and the recomputed relative residual is below tol.
SolveReport solve_direct(const SpMat& M, const Eigen::VectorXd& b,
                         double tol = 1e-10);

struct InfSupReport {
  PenaltyRegime regime = PenaltyRegime::GradBased;
  double rho = 0.0;
  double h = 0.0;
  double beta = 0.0;        // min |lambda| of M x = lambda N x
  double lambda_max = 0.0;  // max |lambda|
};

/// Discrete inf-sup constant of the symmetric form behind M in the norms of
/// N (SPD): the smallest |lambda| of the generalized symmetric eigenproblem.
/// Dense; guarded to coarse problems.
InfSupReport infsup_constant(const BlockSystem& system,
                             const NormMatrices& norms,
                             int max_dofs = 3000);

}  // namespace xg
