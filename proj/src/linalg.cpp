#include "xg/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

namespace xg {

SolveReport solve_direct(const SpMat& M, const Eigen::VectorXd& b,
                         double tol) {
  SolveReport rep;
  if (M.rows() != M.cols() || M.rows() != b.size()) {
    rep.message = "dimension mismatch";
    return rep;
  }
  SpMat Mc = M;
  Mc.makeCompressed();
  Eigen::SparseLU<SpMat> lu;
  lu.compute(Mc);
  if (lu.info() != Eigen::Success) {
    rep.message = "factorization failed (singular or structurally deficient)";
    return rep;
  }
  rep.x = lu.solve(b);
  double bn = b.norm();
  rep.rel_residual = bn > 0 ? (M * rep.x - b).norm() / bn
                            : (M * rep.x).norm();
  if (!std::isfinite(rep.rel_residual) || rep.rel_residual > tol) {
    rep.message = "residual above tolerance";
    return rep;
  }
  rep.ok = true;
  return rep;
}

InfSupReport infsup_constant(const BlockSystem& system,
                             const NormMatrices& norms, int max_dofs) {
  const int n = static_cast<int>(system.M.rows());
  if (n > max_dofs)
    throw std::invalid_argument("infsup_constant: problem too large for a "
                                "dense eigensolve");
  Eigen::MatrixXd M = Eigen::MatrixXd(system.M);
  Eigen::MatrixXd N = Eigen::MatrixXd(norms.whole());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> nev(N,
                                                     Eigen::EigenvaluesOnly);
  if (nev.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("infsup_constant: norm Gram not SPD");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(M, N);
  Eigen::VectorXd ev = ges.eigenvalues();
  InfSupReport rep;
  rep.regime = norms.regime;
  rep.rho = system.spaces.config.rho;
  rep.beta = ev.cwiseAbs().minCoeff();
  rep.lambda_max = ev.cwiseAbs().maxCoeff();
  return rep;
}

}  // namespace xg
