#pragma once

#include "xg/problem.hpp"

namespace xg {

/// Continuous Lagrange solution of the primal problem. Nodal values are
/// stored at vertices (degree 1) or vertices followed by edge midpoints
/// (degree 2); the flux reference is p = -alpha grad u evaluated pointwise.
struct ConformingPrimal {
  const Mesh2D* mesh = nullptr;
  int degree = 1;
  Eigen::VectorXd nodal;

  /// u and its gradient at reference points of a cell.
  void eval(int cell, const Eigen::MatrixXd& ref_pts, Eigen::VectorXd& val,
            Eigen::VectorXd& gx, Eigen::VectorXd& gy) const;
};

/// Lowest-order Raviart-Thomas x piecewise-constant solution of the mixed
/// problem. flux(e) is the total flux of p across edge e in the direction of
/// the mesh's fixed edge normal; u(c) is the cell value.
struct ConformingMixed {
  const Mesh2D* mesh = nullptr;
  Eigen::VectorXd flux;
  Eigen::VectorXd u;

  /// p and div p at reference points of a cell.
  void eval_p(int cell, const Eigen::MatrixXd& ref_pts, Eigen::VectorXd& vx,
              Eigen::VectorXd& vy, Eigen::VectorXd& div) const;
};

/// Solves the primal method with Dirichlet values imposed at Gamma_D nodes
/// and the Neumann flux entering the load; degree in {1, 2}.
ConformingPrimal conforming_primal_solve(const Mesh2D& mesh,
                                         const ProblemData& data, int degree);

/// Solves the mixed method with Gamma_N fluxes imposed and the Dirichlet
/// trace entering the flux equation's right-hand side.
ConformingMixed conforming_mixed_solve(const Mesh2D& mesh,
                                       const ProblemData& data);

}  // namespace xg
