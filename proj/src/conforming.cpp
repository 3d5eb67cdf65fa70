#include "xg/conforming.hpp"

#include <Eigen/SparseLU>

#include "xg/quadrature.hpp"

namespace {

using namespace xg;
using Trip = Eigen::Triplet<double>;

struct LagrangeEval {
  Eigen::MatrixXd val, gx, gy;  // npts x ndof, reference-frame gradients
};

int lagrange_dofs(int degree) { return degree == 1 ? 3 : 6; }

LagrangeEval lagrange_shapes(int degree, const Eigen::MatrixXd& ref_pts) {
  const int npts = static_cast<int>(ref_pts.rows());
  const int nd = lagrange_dofs(degree);
  LagrangeEval ev;
  ev.val.resize(npts, nd);
  ev.gx.resize(npts, nd);
  ev.gy.resize(npts, nd);
  const double glx[3] = {-1.0, 1.0, 0.0};
  const double gly[3] = {-1.0, 0.0, 1.0};
  for (int q = 0; q < npts; ++q) {
    double lam[3] = {1.0 - ref_pts(q, 0) - ref_pts(q, 1), ref_pts(q, 0),
                     ref_pts(q, 1)};
    if (degree == 1) {
      for (int i = 0; i < 3; ++i) {
        ev.val(q, i) = lam[i];
        ev.gx(q, i) = glx[i];
        ev.gy(q, i) = gly[i];
      }
      continue;
    }
    for (int i = 0; i < 3; ++i) {
      ev.val(q, i) = lam[i] * (2.0 * lam[i] - 1.0);
      ev.gx(q, i) = (4.0 * lam[i] - 1.0) * glx[i];
      ev.gy(q, i) = (4.0 * lam[i] - 1.0) * gly[i];
    }
    for (int le = 0; le < 3; ++le) {
      int a = (le + 1) % 3, b = (le + 2) % 3;
      ev.val(q, 3 + le) = 4.0 * lam[a] * lam[b];
      ev.gx(q, 3 + le) = 4.0 * (lam[a] * glx[b] + lam[b] * glx[a]);
      ev.gy(q, 3 + le) = 4.0 * (lam[a] * gly[b] + lam[b] * gly[a]);
    }
  }
  return ev;
}

// global node index of a local Lagrange dof
int node_index(const Mesh2D& mesh, int degree, int cell, int local) {
  if (local < 3) return mesh.cells[cell][local];
  return mesh.n_vertices() + mesh.cell_edges[cell][local - 3];
}

// solve K x = F with some entries pinned to prescribed values
Eigen::VectorXd constrained_solve(int n, const std::vector<Trip>& trips,
                                  const Eigen::VectorXd& F,
                                  const std::vector<char>& fixed,
                                  const Eigen::VectorXd& fval,
                                  const char* what) {
  std::vector<int> compact(n, -1);
  int nf = 0;
  for (int i = 0; i < n; ++i)
    if (!fixed[i]) compact[i] = nf++;
  Eigen::VectorXd rhs(nf);
  for (int i = 0; i < n; ++i)
    if (!fixed[i]) rhs(compact[i]) = F(i);
  std::vector<Trip> red;
  red.reserve(trips.size());
  for (const Trip& t : trips) {
    if (fixed[t.row()]) continue;
    if (fixed[t.col()])
      rhs(compact[t.row()]) -= t.value() * fval(t.col());
    else
      red.emplace_back(compact[t.row()], compact[t.col()], t.value());
  }
  Eigen::SparseMatrix<double> K(nf, nf);
  K.setFromTriplets(red.begin(), red.end());
  K.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(K);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": singular system");
  Eigen::VectorXd xf = nf > 0 ? Eigen::VectorXd(lu.solve(rhs))
                              : Eigen::VectorXd();
  Eigen::VectorXd x = fval;
  for (int i = 0; i < n; ++i)
    if (!fixed[i]) x(i) = xf(compact[i]);
  return x;
}

// reference parameters along a boundary edge of its owning cell, oriented
// from the edge's v0 to v1
Eigen::MatrixXd boundary_edge_refpts(const Mesh2D& mesh, int e,
                                     const CellGeom& geom,
                                     const Eigen::VectorXd& t) {
  const EdgeInfo& ed = mesh.edges[e];
  Eigen::MatrixXd ref(t.size(), 2);
  for (int j = 0; j < t.size(); ++j) {
    Vec2 x = (1.0 - t(j)) * mesh.vertices[ed.v0] + t(j) * mesh.vertices[ed.v1];
    ref.row(j) = (geom.Binv * (x - geom.v0)).transpose();
  }
  return ref;
}

}  // namespace

namespace xg {

void ConformingPrimal::eval(int cell, const Eigen::MatrixXd& ref_pts,
                            Eigen::VectorXd& val, Eigen::VectorXd& gx,
                            Eigen::VectorXd& gy) const {
  const Mesh2D& m = *mesh;
  CellGeom geom = m.cell_geom(cell);
  LagrangeEval sh = lagrange_shapes(degree, ref_pts);
  const int nd = lagrange_dofs(degree);
  Eigen::VectorXd loc(nd);
  for (int i = 0; i < nd; ++i) loc(i) = nodal(node_index(m, degree, cell, i));
  val = sh.val * loc;
  Mat2 Bit = geom.Binv.transpose();
  Eigen::VectorXd rx = sh.gx * loc, ry = sh.gy * loc;
  gx = Bit(0, 0) * rx + Bit(0, 1) * ry;
  gy = Bit(1, 0) * rx + Bit(1, 1) * ry;
}

ConformingPrimal conforming_primal_solve(const Mesh2D& mesh,
                                         const ProblemData& data, int degree) {
  if (degree != 1 && degree != 2)
    throw std::invalid_argument("conforming_primal_solve: degree must be 1 or 2");
  const int n = mesh.n_vertices() + (degree == 2 ? mesh.n_edges() : 0);
  const int nd = lagrange_dofs(degree);
  QuadRule qr = quad_triangle(2 * degree + 2);
  LagrangeEval sh = lagrange_shapes(degree, qr.points);
  std::vector<Trip> trips;
  Eigen::VectorXd F = Eigen::VectorXd::Zero(n);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    CellGeom geom = mesh.cell_geom(c);
    Mat2 Bit = geom.Binv.transpose();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nd, nd);
    Eigen::VectorXd Fl = Eigen::VectorXd::Zero(nd);
    for (int q = 0; q < qr.size(); ++q) {
      Vec2 x = geom.v0 + geom.B * Vec2(qr.points(q, 0), qr.points(q, 1));
      Mat2 a = data.alpha(x);
      double w = qr.weights(q) * geom.det;
      Eigen::Matrix<double, 2, Eigen::Dynamic> g(2, nd);
      for (int i = 0; i < nd; ++i)
        g.col(i) = Bit * Vec2(sh.gx(q, i), sh.gy(q, i));
      K += w * g.transpose() * a * g;
      Fl += w * data.f(x) * sh.val.row(q).transpose();
    }
    for (int i = 0; i < nd; ++i) {
      F(node_index(mesh, degree, c, i)) += Fl(i);
      for (int j = 0; j < nd; ++j)
        trips.emplace_back(node_index(mesh, degree, c, i),
                           node_index(mesh, degree, c, j), K(i, j));
    }
  }
  // boundary terms and constraints
  QuadRule eq = quad_edge(2 * degree + 2);
  std::vector<char> fixed(n, 0);
  Eigen::VectorXd fval = Eigen::VectorXd::Zero(n);
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const EdgeInfo& ed = mesh.edges[e];
    if (ed.tag == EdgeTag::Dirichlet) {
      for (int v : {ed.v0, ed.v1}) {
        fixed[v] = 1;
        fval(v) = data.g_dirichlet(mesh.vertices[v]);
      }
      if (degree == 2) {
        int mid = mesh.n_vertices() + e;
        fixed[mid] = 1;
        fval(mid) = data.g_dirichlet(mesh.edge_midpoint(e));
      }
    } else if (ed.tag == EdgeTag::Neumann) {
      int c = ed.cell_plus;
      CellGeom geom = mesh.cell_geom(c);
      Eigen::MatrixXd ref =
          boundary_edge_refpts(mesh, e, geom, eq.points.col(0));
      LagrangeEval bs = lagrange_shapes(degree, ref);
      for (int q = 0; q < eq.size(); ++q) {
        Vec2 x = (1.0 - eq.points(q, 0)) * mesh.vertices[ed.v0] +
                 eq.points(q, 0) * mesh.vertices[ed.v1];
        double w = eq.weights(q) * ed.h * data.g_neumann(x);
        for (int i = 0; i < nd; ++i)
          F(node_index(mesh, degree, c, i)) -= w * bs.val(q, i);
      }
    }
  }
  ConformingPrimal sol;
  sol.mesh = &mesh;
  sol.degree = degree;
  sol.nodal = constrained_solve(n, trips, F, fixed, fval,
                                "conforming_primal_solve");
  return sol;
}

void ConformingMixed::eval_p(int cell, const Eigen::MatrixXd& ref_pts,
                             Eigen::VectorXd& vx, Eigen::VectorXd& vy,
                             Eigen::VectorXd& div) const {
  const Mesh2D& m = *mesh;
  CellGeom geom = m.cell_geom(cell);
  const double area = 0.5 * geom.det;
  const int npts = static_cast<int>(ref_pts.rows());
  vx = Eigen::VectorXd::Zero(npts);
  vy = Eigen::VectorXd::Zero(npts);
  div = Eigen::VectorXd::Zero(npts);
  for (int le = 0; le < 3; ++le) {
    int e = m.cell_edges[cell][le];
    double s = m.edges[e].cell_plus == cell ? 1.0 : -1.0;
    Vec2 opp = m.vertices[m.cells[cell][le]];
    double c = s * flux(e) / (2.0 * area);
    for (int q = 0; q < npts; ++q) {
      Vec2 x = geom.v0 + geom.B * Vec2(ref_pts(q, 0), ref_pts(q, 1));
      vx(q) += c * (x.x() - opp.x());
      vy(q) += c * (x.y() - opp.y());
      div(q) += 2.0 * c;
    }
  }
}

ConformingMixed conforming_mixed_solve(const Mesh2D& mesh,
                                       const ProblemData& data) {
  const int ne = mesh.n_edges(), nc = mesh.n_cells();
  const int n = ne + nc;
  QuadRule qr = quad_triangle(12);
  std::vector<Trip> trips;
  Eigen::VectorXd F = Eigen::VectorXd::Zero(n);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    CellGeom geom = mesh.cell_geom(c);
    const double area = 0.5 * geom.det;
    int ge[3];
    double sg[3];
    Vec2 opp[3];
    for (int le = 0; le < 3; ++le) {
      ge[le] = mesh.cell_edges[c][le];
      sg[le] = mesh.edges[ge[le]].cell_plus == c ? 1.0 : -1.0;
      opp[le] = mesh.vertices[mesh.cells[c][le]];
    }
    Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
    for (int q = 0; q < qr.size(); ++q) {
      Vec2 x = geom.v0 + geom.B * Vec2(qr.points(q, 0), qr.points(q, 1));
      Mat2 cm = data.c_inv(x);
      double w = qr.weights(q) * geom.det;
      Vec2 phi[3];
      for (int le = 0; le < 3; ++le)
        phi[le] = sg[le] / (2.0 * area) * (x - opp[le]);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          A(i, j) += w * phi[i].dot(cm * phi[j]);
      F(ne + c) -= w * data.f(x);
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) trips.emplace_back(ge[i], ge[j], A(i, j));
      // -(u, div q) and its transpose
      trips.emplace_back(ge[i], ne + c, -sg[i]);
      trips.emplace_back(ne + c, ge[i], -sg[i]);
    }
  }
  QuadRule eq = quad_edge(6);
  std::vector<char> fixed(n, 0);
  Eigen::VectorXd fval = Eigen::VectorXd::Zero(n);
  for (int e = 0; e < ne; ++e) {
    const EdgeInfo& ed = mesh.edges[e];
    if (ed.tag == EdgeTag::Dirichlet) {
      for (int q = 0; q < eq.size(); ++q) {
        Vec2 x = (1.0 - eq.points(q, 0)) * mesh.vertices[ed.v0] +
                 eq.points(q, 0) * mesh.vertices[ed.v1];
        F(e) -= eq.weights(q) * data.g_dirichlet(x);
      }
    } else if (ed.tag == EdgeTag::Neumann) {
      fixed[e] = 1;
      double g = 0.0;
      for (int q = 0; q < eq.size(); ++q) {
        Vec2 x = (1.0 - eq.points(q, 0)) * mesh.vertices[ed.v0] +
                 eq.points(q, 0) * mesh.vertices[ed.v1];
        g += eq.weights(q) * ed.h * data.g_neumann(x);
      }
      fval(e) = g;
    }
  }
  Eigen::VectorXd x =
      constrained_solve(n, trips, F, fixed, fval, "conforming_mixed_solve");
  ConformingMixed sol;
  sol.mesh = &mesh;
  sol.flux = x.head(ne);
  sol.u = x.tail(nc);
  return sol;
}

}  // namespace xg
