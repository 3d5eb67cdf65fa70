#include "xg/basis.hpp"

#include <cmath>
#include <stdexcept>

namespace xg {

int basis_dimension(Family family, int degree) {
  if (degree < 0) return 0;
  switch (family) {
    case Family::ScalarPk:
      return (degree + 1) * (degree + 2) / 2;
    case Family::VectorPk:
      return (degree + 1) * (degree + 2);
    case Family::BrokenRT:
      return (degree + 1) * (degree + 3);
  }
  return 0;
}

std::vector<std::pair<int, int>> monomials_up_to(int maxdeg) {
  std::vector<std::pair<int, int>> expo;
  for (int d = 0; d <= maxdeg; ++d)
    for (int i = d; i >= 0; --i) expo.emplace_back(i, d - i);
  return expo;
}

namespace {

// Powers x^0..x^n in extended precision; pow() in double loses ulps that the
// large orthonormal coefficients amplify during contraction.
std::vector<long double> powers(long double x, int n) {
  std::vector<long double> p(n + 1, 1.0L);
  for (int i = 1; i <= n; ++i) p[i] = p[i - 1] * x;
  return p;
}

MatrixXld monomial_values_ld(int maxdeg, const Eigen::MatrixXd& pts) {
  auto expo = monomials_up_to(maxdeg);
  MatrixXld out(pts.rows(), expo.size());
  for (int p = 0; p < pts.rows(); ++p) {
    auto px = powers(pts(p, 0), maxdeg), py = powers(pts(p, 1), maxdeg);
    for (size_t m = 0; m < expo.size(); ++m)
      out(p, m) = px[expo[m].first] * py[expo[m].second];
  }
  return out;
}

// Contract a monomial table against basis coefficients; the orthonormal
// coefficients are large and cancel heavily.
Eigen::MatrixXd contract(const MatrixXld& table, const MatrixXld& coeffs) {
  MatrixXld r = table * coeffs.transpose();
  return r.cast<double>();
}

// d/dx and d/dy of all monomials, evaluated at points.
void monomial_derivs(int maxdeg, const Eigen::MatrixXd& pts, MatrixXld& dx,
                     MatrixXld& dy) {
  auto expo = monomials_up_to(maxdeg);
  dx.resize(pts.rows(), expo.size());
  dy.resize(pts.rows(), expo.size());
  for (int p = 0; p < pts.rows(); ++p) {
    auto px = powers(pts(p, 0), maxdeg), py = powers(pts(p, 1), maxdeg);
    for (size_t m = 0; m < expo.size(); ++m) {
      int a = expo[m].first, b = expo[m].second;
      dx(p, m) = a > 0 ? a * px[a - 1] * py[b] : 0.0L;
      dy(p, m) = b > 0 ? b * px[a] * py[b - 1] : 0.0L;
    }
  }
}

// Coefficients of the L2-orthonormal scalar basis over monomials up to k,
// from the exact monomial Gram matrix on the reference triangle.
MatrixXld orthonormal_scalar_coeffs(int k) {
  auto expo = monomials_up_to(k);
  int n = static_cast<int>(expo.size());
  // x^a y^b integrates to a! b! / (a+b+2)! over the reference triangle;
  // extended precision here bounds the basis' true orthonormality error.
  auto integral = [](int a, int b) {
    long double val = 1.0L;
    for (int i = 1; i <= b; ++i) val *= i;
    for (int i = a + 1; i <= a + b + 2; ++i) val /= i;
    return val;
  };
  MatrixXld gram(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      gram(i, j) = integral(expo[i].first + expo[j].first,
                            expo[i].second + expo[j].second);
  Eigen::LLT<MatrixXld> llt(gram);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("basis: monomial Gram not SPD");
  MatrixXld L = llt.matrixL();
  // rows of L^{-1} are the basis coefficients
  MatrixXld S =
      L.triangularView<Eigen::Lower>().solve(MatrixXld::Identity(n, n));
  // a refinement pass against the exact Gram tightens orthonormality
  MatrixXld G = S * gram * S.transpose();
  MatrixXld L2 = Eigen::LLT<MatrixXld>(G).matrixL();
  return L2.triangularView<Eigen::Lower>().solve(S);
}

int mono_index(int maxdeg, int a, int b) {
  // position of x^a y^b in monomials_up_to(maxdeg)
  int d = a + b;
  return d * (d + 1) / 2 + (d - a);
}

}  // namespace

BasisSet make_basis(Family family, int degree) {
  if (degree < 0) throw std::invalid_argument("make_basis: degree < 0");
  BasisSet bs;
  bs.family = family;
  bs.degree = degree;
  bs.dim = basis_dimension(family, degree);
  MatrixXld S = orthonormal_scalar_coeffs(degree);
  int sdim = static_cast<int>(S.rows());
  int nmono_k = static_cast<int>(S.cols());
  switch (family) {
    case Family::ScalarPk:
      bs.maxdeg = degree;
      bs.cx = S;
      break;
    case Family::VectorPk: {
      bs.maxdeg = degree;
      bs.cx = MatrixXld::Zero(bs.dim, nmono_k);
      bs.cy = MatrixXld::Zero(bs.dim, nmono_k);
      bs.cx.topRows(sdim) = S;
      bs.cy.bottomRows(sdim) = S;
      break;
    }
    case Family::BrokenRT: {
      bs.maxdeg = degree + 1;
      int nmono = static_cast<int>(monomials_up_to(bs.maxdeg).size());
      bs.cx = MatrixXld::Zero(bs.dim, nmono);
      bs.cy = MatrixXld::Zero(bs.dim, nmono);
      bs.cx.block(0, 0, sdim, nmono_k) = S;
      bs.cy.block(sdim, 0, sdim, nmono_k) = S;
      // supplement x * m for homogeneous monomials m = x^i y^(k-i)
      for (int i = 0; i <= degree; ++i) {
        int row = 2 * sdim + i;
        bs.cx(row, mono_index(bs.maxdeg, i + 1, degree - i)) = 1.0;
        bs.cy(row, mono_index(bs.maxdeg, i, degree - i + 1)) = 1.0;
      }
      break;
    }
  }
  return bs;
}

ScalarEval eval_scalar(const BasisSet& basis, const Eigen::MatrixXd& ref_pts) {
  if (basis.is_vector())
    throw std::invalid_argument("eval_scalar: vector basis");
  MatrixXld mv = monomial_values_ld(basis.maxdeg, ref_pts);
  MatrixXld dx, dy;
  monomial_derivs(basis.maxdeg, ref_pts, dx, dy);
  return {contract(mv, basis.cx), contract(dx, basis.cx),
          contract(dy, basis.cx)};
}

VectorEval eval_vector(const BasisSet& basis, const Eigen::MatrixXd& ref_pts) {
  if (!basis.is_vector())
    throw std::invalid_argument("eval_vector: scalar basis");
  MatrixXld mv = monomial_values_ld(basis.maxdeg, ref_pts);
  MatrixXld dx, dy;
  monomial_derivs(basis.maxdeg, ref_pts, dx, dy);
  VectorEval ev;
  ev.vx = contract(mv, basis.cx);
  ev.vy = contract(mv, basis.cy);
  ev.div = contract(dx, basis.cx) + contract(dy, basis.cy);
  return ev;
}

CellGeom make_geom(const Vec2& a, const Vec2& b, const Vec2& c) {
  CellGeom g;
  g.v0 = a;
  g.B.col(0) = b - a;
  g.B.col(1) = c - a;
  g.det = g.B.determinant();
  if (g.det <= 0.0) throw std::invalid_argument("make_geom: degenerate cell");
  g.Binv = g.B.inverse();
  return g;
}

ScalarEval eval_mapped_scalar(const BasisSet& basis, const CellGeom& geom,
                              const Eigen::MatrixXd& ref_pts) {
  ScalarEval ev = eval_scalar(basis, ref_pts);
  double s = 1.0 / std::sqrt(geom.det);
  Eigen::MatrixXd gx = ev.gx, gy = ev.gy;
  // grad_phys = B^{-T} grad_ref
  ev.gx = s * (gx * geom.Binv(0, 0) + gy * geom.Binv(1, 0));
  ev.gy = s * (gx * geom.Binv(0, 1) + gy * geom.Binv(1, 1));
  ev.val *= s;
  return ev;
}

VectorEval eval_mapped_vector(const BasisSet& basis, const CellGeom& geom,
                              const Eigen::MatrixXd& ref_pts) {
  if (basis.family == Family::BrokenRT) {
    VectorEval ev = eval_vector(basis, ref_pts);
    double s = 1.0 / geom.det;
    Eigen::MatrixXd vx = ev.vx, vy = ev.vy;
    ev.vx = s * (geom.B(0, 0) * vx + geom.B(0, 1) * vy);
    ev.vy = s * (geom.B(1, 0) * vx + geom.B(1, 1) * vy);
    ev.div *= s;
    return ev;
  }
  // VectorPk: each component maps as a scalar, scaled by 1/sqrt(det).
  MatrixXld mv = monomial_values_ld(basis.maxdeg, ref_pts);
  MatrixXld dx, dy;
  monomial_derivs(basis.maxdeg, ref_pts, dx, dy);
  double s = 1.0 / std::sqrt(geom.det);
  VectorEval ev;
  ev.vx = s * contract(mv, basis.cx);
  ev.vy = s * contract(mv, basis.cy);
  Eigen::MatrixXd gxx = contract(dx, basis.cx);  // d qx / dxhat
  Eigen::MatrixXd gyx = contract(dy, basis.cx);  // d qx / dyhat
  Eigen::MatrixXd gxy = contract(dx, basis.cy);
  Eigen::MatrixXd gyy = contract(dy, basis.cy);
  ev.div = s * (gxx * geom.Binv(0, 0) + gyx * geom.Binv(1, 0) +
                gxy * geom.Binv(0, 1) + gyy * geom.Binv(1, 1));
  return ev;
}

Eigen::MatrixXd EdgeBasis::eval(const Eigen::VectorXd& t) const {
  int n = dim();
  Eigen::MatrixXd out(t.size(), std::max(n, 0));
  for (int p = 0; p < t.size(); ++p) {
    double u = 2.0 * t(p) - 1.0;
    double pm1 = 0.0, pj = 1.0;
    for (int j = 0; j < n; ++j) {
      out(p, j) = std::sqrt(2.0 * j + 1.0) * pj;
      double pnext = ((2.0 * j + 1.0) * u * pj - j * pm1) / (j + 1.0);
      pm1 = pj;
      pj = pnext;
    }
  }
  return out;
}

}  // namespace xg
