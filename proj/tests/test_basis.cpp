#include <doctest.h>

#include <random>

#include "xg/basis.hpp"

using namespace xg;

TEST_CASE("basis dimensions") {
  CHECK(make_basis(Family::ScalarPk, 0).dim == 1);
  CHECK(make_basis(Family::BrokenRT, 0).dim == 3);
  CHECK(make_basis(Family::VectorPk, 1).dim == 6);
  CHECK(make_basis(Family::ScalarPk, 3).dim == 10);
  CHECK(make_basis(Family::BrokenRT, 2).dim == 15);
}

TEST_CASE("P0 basis value is sqrt(2) on reference triangle") {
  BasisSet b = make_basis(Family::ScalarPk, 0);
  Eigen::MatrixXd pts(1, 2);
  pts << 0.3, 0.2;
  ScalarEval ev = eval_scalar(b, pts);
  CHECK(ev.val(0, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(ev.gx(0, 0) == doctest::Approx(0.0));
  CHECK(ev.gy(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("scalar basis is orthonormal on the reference triangle, k<=4") {
  for (int k = 0; k <= 4; ++k) {
    BasisSet b = make_basis(Family::ScalarPk, k);
    QuadRule r = quad_triangle(2 * k + 2);
    ScalarEval ev = eval_scalar(b, r.points);
    Eigen::MatrixXd gram =
        ev.val.transpose() * r.weights.asDiagonal() * ev.val;
    CHECK((gram - Eigen::MatrixXd::Identity(b.dim, b.dim)).cwiseAbs().maxCoeff() <
          1e-12);
  }
}

TEST_CASE("divergence of BrokenRT basis lies in scalar Pk") {
  for (int k = 0; k <= 3; ++k) {
    BasisSet rt = make_basis(Family::BrokenRT, k);
    BasisSet pk = make_basis(Family::ScalarPk, k);
    QuadRule r = quad_triangle(2 * k + 2);
    VectorEval ev = eval_vector(rt, r.points);
    ScalarEval sv = eval_scalar(pk, r.points);
    // least-squares expansion of each divergence in the orthonormal Pk basis
    for (int i = 0; i < rt.dim; ++i) {
      Eigen::VectorXd div_i = ev.div.col(i);
      Eigen::VectorXd coef =
          sv.val.transpose() * r.weights.asDiagonal() * div_i;
      double resid =
          ((div_i - sv.val * coef).array().square() * r.weights.array()).sum();
      CHECK(std::sqrt(resid) < 1e-12);
    }
  }
}

TEST_CASE("Piola map: RT0 field x has constant divergence on any affine cell") {
  // reference field (x, y) = sum of the supplementary RT0 function
  BasisSet rt = make_basis(Family::BrokenRT, 0);
  Eigen::MatrixXd pts(3, 2);
  pts << 0.1, 0.1, 0.5, 0.25, 0.2, 0.6;
  VectorEval ref = eval_vector(rt, pts);
  // field x is basis function index 2 (the supplement)
  for (int q = 0; q < 3; ++q) {
    CHECK(ref.vx(q, 2) == doctest::Approx(pts(q, 0)));
    CHECK(ref.vy(q, 2) == doctest::Approx(pts(q, 1)));
    CHECK(ref.div(q, 2) == doctest::Approx(2.0));
  }
  CellGeom g = make_geom(Vec2(0.2, 0.1), Vec2(1.1, 0.3), Vec2(0.4, 1.7));
  VectorEval phys = eval_mapped_vector(rt, g, pts);
  for (int q = 0; q < 3; ++q)
    CHECK(phys.div(q, 2) == doctest::Approx(2.0 / g.det).epsilon(1e-13));
}

TEST_CASE("identity-mapped cell reproduces reference values") {
  CellGeom g = make_geom(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1));
  BasisSet b = make_basis(Family::ScalarPk, 2);
  Eigen::MatrixXd pts(2, 2);
  pts << 0.25, 0.25, 0.1, 0.7;
  ScalarEval ref = eval_scalar(b, pts);
  ScalarEval phys = eval_mapped_scalar(b, g, pts);
  CHECK((ref.val - phys.val).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ref.gx - phys.gx).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mapped scalar basis stays orthonormal on physical cell") {
  CellGeom g = make_geom(Vec2(0, 0), Vec2(0.5, 0.1), Vec2(0.1, 0.8));
  BasisSet b = make_basis(Family::ScalarPk, 2);
  QuadRule r = quad_triangle(6);
  ScalarEval ev = eval_mapped_scalar(b, g, r.points);
  Eigen::MatrixXd gram =
      g.det * ev.val.transpose() * r.weights.asDiagonal() * ev.val;
  CHECK((gram - Eigen::MatrixXd::Identity(b.dim, b.dim)).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("degenerate cell rejected") {
  CHECK_THROWS(make_geom(Vec2(0, 0), Vec2(1, 0), Vec2(2, 0)));
  // clockwise triple has det < 0
  CHECK_THROWS(make_geom(Vec2(0, 0), Vec2(0, 1), Vec2(1, 0)));
}

TEST_CASE("edge basis orthonormal on [0,1]") {
  EdgeBasis eb{4};
  QuadRule r = quad_edge(10);
  Eigen::MatrixXd phi = eb.eval(r.points.col(0));
  Eigen::MatrixXd gram = phi.transpose() * r.weights.asDiagonal() * phi;
  CHECK((gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);
}
