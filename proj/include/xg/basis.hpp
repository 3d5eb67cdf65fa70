#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "xg/quadrature.hpp"

namespace xg {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

enum class Family { ScalarPk, VectorPk, BrokenRT };

/// Scalar basis dimension (k+1)(k+2)/2; vector families per family formula.
int basis_dimension(Family family, int degree);

/// Monomial exponent list (a,b) ordered by total degree, x-power first:
/// 1, x, y, x^2, xy, y^2, ...
std::vector<std::pair<int, int>> monomials_up_to(int maxdeg);

/// Polynomial basis on the reference triangle, stored as monomial
/// coefficients. The scalar family is L2-orthonormal on the reference cell.
struct BasisSet {
  Family family = Family::ScalarPk;
  int degree = 0;
  int dim = 0;
  int maxdeg = 0;    // monomial degree bound of the components
  // dim x nmono; scalar basis uses cx only. Kept in extended precision:
  // the orthonormal coefficients are large and cancel when evaluated.
  MatrixXld cx, cy;

  bool is_vector() const { return family != Family::ScalarPk; }
};

BasisSet make_basis(Family family, int degree);

struct ScalarEval {
  Eigen::MatrixXd val, gx, gy;  // npts x dim
};
struct VectorEval {
  Eigen::MatrixXd vx, vy, div;  // npts x dim
};

ScalarEval eval_scalar(const BasisSet& basis, const Eigen::MatrixXd& ref_pts);
VectorEval eval_vector(const BasisSet& basis, const Eigen::MatrixXd& ref_pts);

/// Affine cell geometry x = v0 + B xhat, det B > 0.
struct CellGeom {
  Vec2 v0;
  Mat2 B;
  Mat2 Binv;
  double det = 0.0;
};

CellGeom make_geom(const Vec2& a, const Vec2& b, const Vec2& c);

/// Physical-frame evaluation at the given reference points.
/// Scalar/VectorPk components are scaled by 1/sqrt(det B) so that reference
/// orthonormality carries over to the physical cell; gradients use the
/// inverse-transpose Jacobian. BrokenRT uses the contravariant Piola map
/// (divergence scales by 1/det B).
ScalarEval eval_mapped_scalar(const BasisSet& basis, const CellGeom& geom,
                              const Eigen::MatrixXd& ref_pts);
VectorEval eval_mapped_vector(const BasisSet& basis, const CellGeom& geom,
                              const Eigen::MatrixXd& ref_pts);

/// Legendre-orthonormal basis of degree k on the reference segment [0,1].
struct EdgeBasis {
  int degree = -1;  // -1 = trivial space (no functions)
  int dim() const { return degree + 1; }
  /// Values at parameters t in [0,1]; npts x dim.
  Eigen::MatrixXd eval(const Eigen::VectorXd& t) const;
};

}  // namespace xg
