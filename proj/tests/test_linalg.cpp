#include <doctest.h>

#include <random>

#include "xg/linalg.hpp"

using namespace xg;

namespace {

// Dense Gaussian elimination with partial pivoting, written independently
// of Eigen's factorizations to serve as an oracle.
Eigen::VectorXd dense_ge_solve(Eigen::MatrixXd A, Eigen::VectorXd b) {
  const int n = static_cast<int>(A.rows());
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(A(i, k)) > std::abs(A(piv, k))) piv = i;
    A.row(k).swap(A.row(piv));
    std::swap(b(k), b(piv));
    for (int i = k + 1; i < n; ++i) {
      double m = A(i, k) / A(k, k);
      A.row(i).tail(n - k) -= m * A.row(k).tail(n - k);
      b(i) -= m * b(k);
    }
  }
  Eigen::VectorXd x(n);
  for (int i = n - 1; i >= 0; --i)
    x(i) = (b(i) - A.row(i).tail(n - 1 - i).dot(x.tail(n - 1 - i))) / A(i, i);
  return x;
}

// Cyclic Jacobi eigenvalue iteration for a symmetric matrix; oracle for the
// generalized solve after a Cholesky congruence.
Eigen::VectorXd jacobi_eigenvalues(Eigen::MatrixXd A, int sweeps = 60) {
  const int n = static_cast<int>(A.rows());
  for (int s = 0; s < sweeps; ++s) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    if (off < 1e-26) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(A(p, q)) < 1e-18) continue;
        double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0), sn = t * c;
        Eigen::VectorXd Ap = A.col(p), Aq = A.col(q);
        A.col(p) = c * Ap - sn * Aq;
        A.col(q) = sn * Ap + c * Aq;
        Ap = A.row(p);
        Aq = A.row(q);
        A.row(p) = c * Ap.transpose() - sn * Aq.transpose();
        A.row(q) = sn * Ap.transpose() + c * Aq.transpose();
      }
  }
  return A.diagonal();
}

BlockSystem one_cell_system(MethodConfig& cfg, Mesh2D& mesh) {
  mesh = build_structured_unit_square(1);
  cfg.deg_p = 0;
  cfg.deg_u = 0;
  cfg.deg_pcheck = 0;
  cfg.deg_ucheck = 0;
  Spaces sp = build_spaces(mesh, cfg);
  ProblemData d = zero_data();
  d.f = [](const Vec2& x) { return 1.0 + x.x(); };
  d.g_dirichlet = [](const Vec2& x) { return x.y(); };
  return assemble_system(mesh, sp, d, cfg);
}

}  // namespace

TEST_CASE("solve_direct basic solves") {
  SpMat I(3, 3);
  I.setIdentity();
  Eigen::Vector3d b(1, -2, 5);
  SolveReport r = solve_direct(I, b);
  CHECK(r.ok);
  CHECK(r.x == b);

  SpMat M(2, 2);
  M.insert(0, 1) = 1.0;
  M.insert(1, 0) = 1.0;
  Eigen::Vector2d b2(1, 2);
  SolveReport r2 = solve_direct(M, b2);
  CHECK(r2.ok);
  CHECK(r2.x(0) == doctest::Approx(2.0));
  CHECK(r2.x(1) == doctest::Approx(1.0));
}

TEST_CASE("solve_direct reports failure instead of throwing") {
  SpMat Z(2, 2);
  Z.insert(0, 0) = 1.0;  // second row empty -> singular
  Eigen::Vector2d b(1, 1);
  SolveReport r = solve_direct(Z, b);
  CHECK_FALSE(r.ok);
  CHECK_FALSE(r.message.empty());
}

TEST_CASE("4-field system matches the dense elimination oracle") {
  MethodConfig cfg;
  Mesh2D mesh;
  BlockSystem sys = one_cell_system(cfg, mesh);
  SolveReport r = solve_direct(sys.M, sys.rhs);
  REQUIRE(r.ok);
  CHECK(r.rel_residual < 1e-10);
  Eigen::VectorXd oracle =
      dense_ge_solve(Eigen::MatrixXd(sys.M), sys.rhs);
  CHECK((r.x - oracle).norm() / oracle.norm() < 1e-10);
  // the system is nonsingular: oracle's back-substitution succeeded and
  // reproduces the rhs
  CHECK((Eigen::MatrixXd(sys.M) * oracle - sys.rhs).norm() < 1e-10);
}

TEST_CASE("infsup constant: M = N gives beta = 1") {
  Mesh2D mesh;
  MethodConfig cfg;
  BlockSystem sys = one_cell_system(cfg, mesh);
  // synthetic: use the norm Gram itself as the operator
  Spaces sp = sys.spaces;
  NormMatrices nm = assemble_norm_grams(mesh, sp, cfg, cfg.regime);
  BlockSystem same = sys;
  same.M = nm.whole();
  InfSupReport rep = infsup_constant(same, nm);
  CHECK(rep.beta == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.lambda_max == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("infsup constant matches the Jacobi oracle") {
  Mesh2D mesh;
  MethodConfig cfg;
  BlockSystem sys = one_cell_system(cfg, mesh);
  NormMatrices nm = assemble_norm_grams(mesh, sys.spaces, cfg, cfg.regime);
  InfSupReport rep = infsup_constant(sys, nm);
  CHECK(rep.beta > 0.0);
  // oracle: Cholesky congruence then cyclic Jacobi
  Eigen::MatrixXd N = Eigen::MatrixXd(nm.whole());
  Eigen::MatrixXd M = Eigen::MatrixXd(sys.M);
  Eigen::LLT<Eigen::MatrixXd> llt(N);
  Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd S =
      L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd(
          L.triangularView<Eigen::Lower>().solve(M).transpose()));
  Eigen::VectorXd ev = jacobi_eigenvalues(S);
  CHECK(rep.beta ==
        doctest::Approx(ev.cwiseAbs().minCoeff()).epsilon(1e-6));
  CHECK(rep.lambda_max ==
        doctest::Approx(ev.cwiseAbs().maxCoeff()).epsilon(1e-6));
}

TEST_CASE("infsup constant invariant under permutation") {
  Mesh2D mesh;
  MethodConfig cfg;
  BlockSystem sys = one_cell_system(cfg, mesh);
  NormMatrices nm = assemble_norm_grams(mesh, sys.spaces, cfg, cfg.regime);
  InfSupReport rep = infsup_constant(sys, nm);
  const int n = static_cast<int>(sys.M.rows());
  std::mt19937 rng(5);
  Eigen::PermutationMatrix<Eigen::Dynamic> P(n);
  P.setIdentity();
  std::shuffle(P.indices().data(), P.indices().data() + n, rng);
  BlockSystem psys = sys;
  psys.M = SpMat(P * sys.M * P.transpose());
  NormMatrices pnm = nm;
  pnm.n_ptilde = SpMat(P * nm.n_ptilde * P.transpose());
  pnm.n_utilde = SpMat(P * nm.n_utilde * P.transpose());
  InfSupReport prep = infsup_constant(psys, pnm);
  CHECK(prep.beta == doctest::Approx(rep.beta).epsilon(1e-10));
}

TEST_CASE("infsup constant guards") {
  Mesh2D mesh;
  MethodConfig cfg;
  BlockSystem sys = one_cell_system(cfg, mesh);
  NormMatrices nm = assemble_norm_grams(mesh, sys.spaces, cfg, cfg.regime);
  CHECK_THROWS(infsup_constant(sys, nm, /*max_dofs=*/4));
  NormMatrices bad = nm;
  bad.n_utilde = SpMat(-1.0 * nm.n_utilde);
  CHECK_THROWS(infsup_constant(sys, bad));
}
