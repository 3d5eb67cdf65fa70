#include "xg/assembly.hpp"

#include <omp.h>

#include <ostream>
#include <stdexcept>

namespace xg {

EdgeTraces dg_average_jump(const EdgeInfo& edge, double v_plus, double v_minus,
                           double qn_plus, double qn_minus) {
  EdgeTraces t;
  if (!edge.is_boundary()) {
    t.avg_v = 0.5 * (v_plus + v_minus);
    t.jump_v_e = v_plus - v_minus;
    t.avg_q_e = 0.5 * (qn_plus + qn_minus);
    t.jump_q = qn_plus - qn_minus;
    return t;
  }
  t.avg_v = v_plus;
  t.avg_q_e = qn_plus;
  if (edge.tag == EdgeTag::Dirichlet) {
    t.jump_v_e = v_plus;
    t.jump_q = 0.0;
  } else {
    t.jump_v_e = 0.0;
    t.jump_q = qn_plus;
  }
  return t;
}

int form_quadrature_degree(const MethodConfig& config) {
  int kmax = 1;
  int kp = config.deg_p + (config.q_family == Family::BrokenRT ? 1 : 0);
  kmax = std::max(kmax, kp);
  kmax = std::max(kmax, config.deg_u);
  kmax = std::max(kmax, config.deg_pcheck);
  kmax = std::max(kmax, config.deg_ucheck);
  return 2 * kmax + 3;
}

namespace {

// Run a per-entity kernel either serially or in an OpenMP loop with
// per-entity buffers merged in entity order, so both modes emit the same
// triplet sequence.
template <class Fn>
void run_entities(int n, AssemblyMode mode, std::vector<Triplet>& out,
                  const Fn& local) {
  if (mode == AssemblyMode::Serial) {
    for (int i = 0; i < n; ++i) local(i, out);
    return;
  }
  std::vector<std::vector<Triplet>> buf(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) local(i, buf[i]);
  for (int i = 0; i < n; ++i)
    out.insert(out.end(), buf[i].begin(), buf[i].end());
}

SpMat to_sparse(int n, const std::vector<Triplet>& trips) {
  SpMat m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

// Trace tables of the cell fields of one side of an edge, sampled at the
// edge quadrature parameters.
struct SideTrace {
  Eigen::MatrixXd uval;       // npts x dim(V)
  Eigen::MatrixXd qn;         // npts x dim(Q), flux through n_e
};

Eigen::MatrixXd edge_ref_points(const Mesh2D& mesh, int cell, int e,
                                const QuadRule& rule) {
  const EdgeInfo& edge = mesh.edges[e];
  CellGeom g = mesh.cell_geom(cell);
  Vec2 a = mesh.vertices[edge.v0], b = mesh.vertices[edge.v1];
  Eigen::MatrixXd ref(rule.size(), 2);
  for (int q = 0; q < rule.size(); ++q) {
    Vec2 x = a + rule.points(q, 0) * (b - a);
    Vec2 xhat = g.Binv * (x - g.v0);
    ref.row(q) = xhat.transpose();
  }
  return ref;
}

SideTrace side_trace(const Mesh2D& mesh, const Spaces& sp, int cell, int e,
                     const QuadRule& rule) {
  SideTrace st;
  CellGeom g = mesh.cell_geom(cell);
  Eigen::MatrixXd ref = edge_ref_points(mesh, cell, e, rule);
  const Vec2 n = mesh.edges[e].normal;
  if (sp.basis_u.dim > 0 && sp.config.deg_u >= 0)
    st.uval = eval_mapped_scalar(sp.basis_u, g, ref).val;
  else
    st.uval.resize(rule.size(), 0);
  if (sp.config.deg_p >= 0) {
    VectorEval qe = eval_mapped_vector(sp.basis_p, g, ref);
    st.qn = qe.vx * n.x() + qe.vy * n.y();
  } else {
    st.qn.resize(rule.size(), 0);
  }
  return st;
}

// Physical edge basis values (scaled 1/sqrt(h)).
Eigen::MatrixXd edge_basis_values(const EdgeBasis& basis, const EdgeInfo& edge,
                                  const QuadRule& rule) {
  if (basis.degree < 0) return Eigen::MatrixXd(rule.size(), 0);
  return basis.eval(rule.points.col(0)) / std::sqrt(edge.h);
}

void check_penalties(const Mesh2D& mesh, const Spaces& sp, bool need_tau,
                     bool need_eta) {
  for (int e = 0; e < mesh.n_edges(); ++e) {
    if (need_tau && sp.pcheck.count[e] > 0 &&
        !(sp.config.tau(mesh.edges[e]) > 0.0))
      throw std::invalid_argument("assemble: tau <= 0 on an active edge");
    if (need_eta && sp.ucheck.count[e] > 0 &&
        !(sp.config.eta(mesh.edges[e]) > 0.0))
      throw std::invalid_argument("assemble: eta <= 0 on an active edge");
  }
}

enum class BForm { Grad, Div };

SpMat assemble_b(const Mesh2D& mesh, const Spaces& sp,
                 const MethodConfig& config, BForm form, AssemblyMode mode) {
  const int qdeg = form_quadrature_degree(config);
  const QuadRule tri = quad_triangle(qdeg);
  const QuadRule seg = quad_edge(qdeg);
  std::vector<Triplet> trips;

  const bool has_p = config.deg_p >= 0;
  const bool has_u = config.deg_u >= 0;

  // volume term: (grad_h u, q) or -(u, div_h q)
  if (has_p && has_u)
    run_entities(mesh.n_cells(), mode, trips,
                 [&](int c, std::vector<Triplet>& out) {
                   CellGeom g = mesh.cell_geom(c);
                   ScalarEval ue = eval_mapped_scalar(sp.basis_u, g, tri.points);
                   VectorEval qe = eval_mapped_vector(sp.basis_p, g, tri.points);
                   Eigen::MatrixXd loc;  // rows q_j, cols u_i
                   if (form == BForm::Grad)
                     loc = g.det * (qe.vx.transpose() * tri.weights.asDiagonal() * ue.gx +
                                    qe.vy.transpose() * tri.weights.asDiagonal() * ue.gy);
                   else
                     loc = -g.det *
                           (qe.div.transpose() * tri.weights.asDiagonal() * ue.val);
                   for (int j = 0; j < sp.basis_p.dim; ++j)
                     for (int i = 0; i < sp.basis_u.dim; ++i)
                       out.emplace_back(sp.global_p(c, j), sp.global_u(c, i),
                                        loc(j, i));
                 });

  // edge terms
  run_entities(mesh.n_edges(), mode, trips, [&](int e,
                                                std::vector<Triplet>& out) {
    const EdgeInfo& edge = mesh.edges[e];
    std::vector<int> cells = {edge.cell_plus};
    if (!edge.is_boundary()) cells.push_back(edge.cell_minus);
    std::vector<SideTrace> st;
    for (int c : cells) st.push_back(side_trace(mesh, sp, c, e, seg));
    Eigen::MatrixXd pchk = edge_basis_values(sp.basis_pcheck, edge, seg);
    Eigen::MatrixXd uchk = edge_basis_values(sp.basis_ucheck, edge, seg);
    const int n_pchk = sp.pcheck.count[e];
    const int n_uchk = sp.ucheck.count[e];
    const int nu = has_u ? sp.basis_u.dim : 0;
    const int np = has_p ? sp.basis_p.dim : 0;

    for (int q = 0; q < seg.size(); ++q) {
      const double w = seg.weights(q) * edge.h;
      // per-basis-function traces through the DG operators; each basis
      // function lives on exactly one side
      for (int sj = 0; sj < static_cast<int>(cells.size()); ++sj) {
        for (int j = 0; j < np; ++j) {
          double qn = st[sj].qn(q, j);
          EdgeTraces tq = sj == 0 ? dg_average_jump(edge, 0, 0, qn, 0)
                                  : dg_average_jump(edge, 0, 0, 0, qn);
          int row = sp.global_p(cells[sj], j);
          for (int si = 0; si < static_cast<int>(cells.size()); ++si) {
            for (int i = 0; i < nu; ++i) {
              double uv = st[si].uval(q, i);
              EdgeTraces tu = si == 0 ? dg_average_jump(edge, uv, 0, 0, 0)
                                      : dg_average_jump(edge, 0, uv, 0, 0);
              double val = form == BForm::Grad
                               ? -tu.jump_v_e * tq.avg_q_e
                               : tu.avg_v * tq.jump_q;
              if (val != 0.0)
                out.emplace_back(row, sp.global_u(cells[si], i), w * val);
            }
          }
          // <ucheck, [q]> (identical in both forms)
          for (int k = 0; k < n_uchk; ++k)
            out.emplace_back(row, sp.global_ucheck(e, k),
                             w * tq.jump_q * uchk(q, k));
        }
      }
      // -<[u]_e, qcheck> (identical in both forms)
      for (int k = 0; k < n_pchk; ++k) {
        int row = sp.global_pcheck(e, k);
        for (int si = 0; si < static_cast<int>(cells.size()); ++si) {
          for (int i = 0; i < nu; ++i) {
            double uv = st[si].uval(q, i);
            EdgeTraces tu = si == 0 ? dg_average_jump(edge, uv, 0, 0, 0)
                                    : dg_average_jump(edge, 0, uv, 0, 0);
            if (tu.jump_v_e != 0.0)
              out.emplace_back(row, sp.global_u(cells[si], i),
                               -w * tu.jump_v_e * pchk(q, k));
          }
        }
      }
    }
  });

  return to_sparse(sp.total, trips);
}

}  // namespace

SpMat assemble_b_grad(const Mesh2D& mesh, const Spaces& spaces,
                      const MethodConfig& config, AssemblyMode mode) {
  return assemble_b(mesh, spaces, config, BForm::Grad, mode);
}

SpMat assemble_b_div(const Mesh2D& mesh, const Spaces& spaces,
                     const MethodConfig& config, AssemblyMode mode) {
  return assemble_b(mesh, spaces, config, BForm::Div, mode);
}

SpMat assemble_a(const Mesh2D& mesh, const Spaces& spaces,
                 const ProblemData& data, const MethodConfig& config,
                 AssemblyMode mode) {
  check_penalties(mesh, spaces, /*need_tau=*/true, /*need_eta=*/false);
  const QuadRule tri = quad_triangle(form_quadrature_degree(config));
  std::vector<Triplet> trips;
  if (config.deg_p >= 0)
    run_entities(mesh.n_cells(), mode, trips,
                 [&](int c, std::vector<Triplet>& out) {
                   CellGeom g = mesh.cell_geom(c);
                   VectorEval qe = eval_mapped_vector(spaces.basis_p, g, tri.points);
                   int n = spaces.basis_p.dim;
                   Eigen::MatrixXd loc = Eigen::MatrixXd::Zero(n, n);
                   for (int q = 0; q < tri.size(); ++q) {
                     Vec2 x = g.v0 + g.B * tri.points.row(q).transpose();
                     Mat2 cmat = data.c_inv(x);
                     Eigen::MatrixXd qv(2, n);
                     qv.row(0) = qe.vx.row(q);
                     qv.row(1) = qe.vy.row(q);
                     loc += (g.det * tri.weights(q)) * qv.transpose() * cmat * qv;
                   }
                   for (int i = 0; i < n; ++i)
                     for (int j = 0; j < n; ++j)
                       out.emplace_back(spaces.global_p(c, i),
                                        spaces.global_p(c, j), loc(i, j));
                 });
  // <tau^{-1} pcheck, qcheck>: diagonal in the physical orthonormal basis
  run_entities(mesh.n_edges(), mode, trips,
               [&](int e, std::vector<Triplet>& out) {
                 int n = spaces.pcheck.count[e];
                 if (n == 0) return;
                 double ti = 1.0 / config.tau(mesh.edges[e]);
                 for (int k = 0; k < n; ++k) {
                   int g = spaces.global_pcheck(e, k);
                   out.emplace_back(g, g, ti);
                 }
               });
  return to_sparse(spaces.total, trips);
}

SpMat assemble_c(const Mesh2D& mesh, const Spaces& spaces,
                 const MethodConfig& config, AssemblyMode mode) {
  check_penalties(mesh, spaces, /*need_tau=*/false, /*need_eta=*/true);
  std::vector<Triplet> trips;
  run_entities(mesh.n_edges(), mode, trips,
               [&](int e, std::vector<Triplet>& out) {
                 int n = spaces.ucheck.count[e];
                 if (n == 0) return;
                 double ei = 1.0 / config.eta(mesh.edges[e]);
                 for (int k = 0; k < n; ++k) {
                   int g = spaces.global_ucheck(e, k);
                   out.emplace_back(g, g, ei);
                 }
               });
  return to_sparse(spaces.total, trips);
}

Eigen::VectorXd assemble_rhs(const Mesh2D& mesh, const Spaces& spaces,
                             const ProblemData& data,
                             const MethodConfig& config, AssemblyMode mode) {
  const int qdeg = form_quadrature_degree(config);
  const QuadRule tri = quad_triangle(qdeg);
  const QuadRule seg = quad_edge(qdeg);
  std::vector<Triplet> trips;  // (row, 0, value) accumulation

  if (config.deg_u >= 0)
    run_entities(mesh.n_cells(), mode, trips,
                 [&](int c, std::vector<Triplet>& out) {
                   CellGeom g = mesh.cell_geom(c);
                   ScalarEval ue = eval_mapped_scalar(spaces.basis_u, g, tri.points);
                   for (int q = 0; q < tri.size(); ++q) {
                     Vec2 x = g.v0 + g.B * tri.points.row(q).transpose();
                     double w = -g.det * tri.weights(q) * data.f(x);
                     for (int i = 0; i < spaces.basis_u.dim; ++i)
                       out.emplace_back(spaces.global_u(c, i), 0,
                                        w * ue.val(q, i));
                   }
                 });

  run_entities(mesh.n_edges(), mode, trips, [&](int e,
                                                std::vector<Triplet>& out) {
    const EdgeInfo& edge = mesh.edges[e];
    if (!edge.is_boundary()) return;
    int c = edge.cell_plus;
    SideTrace st = side_trace(mesh, spaces, c, e, seg);
    Eigen::MatrixXd pchk = edge_basis_values(spaces.basis_pcheck, edge, seg);
    Eigen::MatrixXd uchk = edge_basis_values(spaces.basis_ucheck, edge, seg);
    Vec2 a = mesh.vertices[edge.v0], b = mesh.vertices[edge.v1];
    for (int q = 0; q < seg.size(); ++q) {
      Vec2 x = a + seg.points(q, 0) * (b - a);
      double w = seg.weights(q) * edge.h;
      if (edge.tag == EdgeTag::Dirichlet) {
        double gd = data.g_dirichlet(x);
        for (int j = 0; j < st.qn.cols(); ++j)
          out.emplace_back(spaces.global_p(c, j), 0, -w * gd * st.qn(q, j));
        for (int k = 0; k < spaces.pcheck.count[e]; ++k)
          out.emplace_back(spaces.global_pcheck(e, k), 0,
                           -w * gd * pchk(q, k));
      } else {  // Neumann
        double gn = data.g_neumann(x);
        for (int i = 0; i < st.uval.cols(); ++i)
          out.emplace_back(spaces.global_u(c, i), 0, w * gn * st.uval(q, i));
        for (int k = 0; k < spaces.ucheck.count[e]; ++k)
          out.emplace_back(spaces.global_ucheck(e, k), 0,
                           w * gn * uchk(q, k));
      }
    }
  });

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(spaces.total);
  for (const auto& t : trips) rhs(t.row()) += t.value();
  return rhs;
}

BlockSystem assemble_system(const Mesh2D& mesh, const Spaces& spaces,
                            const ProblemData& data,
                            const MethodConfig& config, AssemblyMode mode) {
  BlockSystem sys;
  sys.spaces = spaces;
  SpMat A = assemble_a(mesh, spaces, data, config, mode);
  SpMat B = assemble_b_grad(mesh, spaces, config, mode);
  SpMat C = assemble_c(mesh, spaces, config, mode);
  sys.M = A + SpMat(B.transpose()) + B - C;
  sys.rhs = assemble_rhs(mesh, spaces, data, config, mode);
  return sys;
}

SpMat jump_moment_matrix(const Mesh2D& mesh, const Spaces& spaces,
                         FieldKind check_field) {
  const bool for_p = check_field == FieldKind::Pcheck;
  const DofMap& cmap = for_p ? spaces.pcheck : spaces.ucheck;
  const EdgeBasis& cbasis = for_p ? spaces.basis_pcheck : spaces.basis_ucheck;
  const DofMap& fmap = for_p ? spaces.u : spaces.p;
  const QuadRule seg = quad_edge(form_quadrature_degree(spaces.config));
  std::vector<Triplet> trips;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const EdgeInfo& edge = mesh.edges[e];
    if (cmap.count[e] == 0) continue;
    std::vector<int> cells = {edge.cell_plus};
    if (!edge.is_boundary()) cells.push_back(edge.cell_minus);
    Eigen::MatrixXd chk = edge_basis_values(cbasis, edge, seg);
    for (int s = 0; s < static_cast<int>(cells.size()); ++s) {
      SideTrace st = side_trace(mesh, spaces, cells[s], e, seg);
      const Eigen::MatrixXd& tab = for_p ? st.uval : st.qn;
      for (int q = 0; q < seg.size(); ++q) {
        double w = seg.weights(q) * edge.h;
        for (int i = 0; i < tab.cols(); ++i) {
          EdgeTraces t = for_p
                             ? (s == 0 ? dg_average_jump(edge, tab(q, i), 0, 0, 0)
                                       : dg_average_jump(edge, 0, tab(q, i), 0, 0))
                             : (s == 0 ? dg_average_jump(edge, 0, 0, tab(q, i), 0)
                                       : dg_average_jump(edge, 0, 0, 0, tab(q, i)));
          double jump = for_p ? t.jump_v_e : t.jump_q;
          if (jump == 0.0) continue;
          int col = fmap.offset[cells[s]] + i;
          for (int k = 0; k < cmap.count[e]; ++k)
            trips.emplace_back(cmap.offset[e] + k, col,
                               w * jump * chk(q, k));
        }
      }
    }
  }
  SpMat m(cmap.total, fmap.total);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

NormMatrices assemble_norm_grams(const Mesh2D& mesh, const Spaces& spaces,
                                 const MethodConfig& config,
                                 PenaltyRegime regime, const ProblemData* data,
                                 AssemblyMode mode) {
  if (regime == PenaltyRegime::Manual || regime != config.regime)
    throw std::invalid_argument("assemble_norm_grams: regime mismatch");
  const QuadRule tri = quad_triangle(form_quadrature_degree(config));
  const double rho = config.rho;
  ProblemData ident = zero_data();
  const ProblemData& d = data ? *data : ident;
  NormMatrices nm;
  nm.regime = regime;
  std::vector<Triplet> tp, tu;

  // p mass weighted by c = alpha^{-1}, shared by both regimes
  if (config.deg_p >= 0)
    run_entities(mesh.n_cells(), mode, tp,
                 [&](int c, std::vector<Triplet>& out) {
                   CellGeom g = mesh.cell_geom(c);
                   VectorEval qe = eval_mapped_vector(spaces.basis_p, g, tri.points);
                   int n = spaces.basis_p.dim;
                   Eigen::MatrixXd loc = Eigen::MatrixXd::Zero(n, n);
                   for (int q = 0; q < tri.size(); ++q) {
                     Vec2 x = g.v0 + g.B * tri.points.row(q).transpose();
                     Mat2 cmat = d.c_inv(x);
                     Eigen::MatrixXd qv(2, n);
                     qv.row(0) = qe.vx.row(q);
                     qv.row(1) = qe.vy.row(q);
                     loc += (g.det * tri.weights(q)) * qv.transpose() * cmat * qv;
                   }
                   if (regime == PenaltyRegime::DivBased) {
                     // + (div p, div p)
                     loc += g.det * qe.div.transpose() *
                            tri.weights.asDiagonal() * qe.div;
                   }
                   for (int i = 0; i < n; ++i)
                     for (int j = 0; j < n; ++j)
                       out.emplace_back(spaces.global_p(c, i),
                                        spaces.global_p(c, j), loc(i, j));
                 });

  if (regime == PenaltyRegime::GradBased) {
    // ptilde: + <rho h pcheck, qcheck>
    for (int e = 0; e < mesh.n_edges(); ++e)
      for (int k = 0; k < spaces.pcheck.count[e]; ++k) {
        int g = spaces.global_pcheck(e, k);
        tp.emplace_back(g, g, rho * mesh.edges[e].h);
      }
    // utilde: broken H1 seminorm
    if (config.deg_u >= 0)
      run_entities(mesh.n_cells(), mode, tu,
                   [&](int c, std::vector<Triplet>& out) {
                     CellGeom g = mesh.cell_geom(c);
                     ScalarEval ue = eval_mapped_scalar(spaces.basis_u, g, tri.points);
                     Eigen::MatrixXd loc =
                         g.det * (ue.gx.transpose() * tri.weights.asDiagonal() * ue.gx +
                                  ue.gy.transpose() * tri.weights.asDiagonal() * ue.gy);
                     for (int i = 0; i < loc.rows(); ++i)
                       for (int j = 0; j < loc.cols(); ++j)
                         out.emplace_back(spaces.global_u(c, i),
                                          spaces.global_u(c, j), loc(i, j));
                   });
    // + <(rho h)^{-1} projected jump of u, same> via the moment matrix
    SpMat T = jump_moment_matrix(mesh, spaces, FieldKind::Pcheck);
    Eigen::VectorXd dinv(spaces.pcheck.total);
    for (int e = 0; e < mesh.n_edges(); ++e)
      for (int k = 0; k < spaces.pcheck.count[e]; ++k)
        dinv(spaces.pcheck.offset[e] + k) = 1.0 / (rho * mesh.edges[e].h);
    SpMat J = SpMat(T.transpose()) * dinv.asDiagonal() * T;  // u x u block
    for (int c = 0; c < J.outerSize(); ++c)
      for (SpMat::InnerIterator it(J, c); it; ++it)
        tu.emplace_back(spaces.off_u + it.row(), spaces.off_u + it.col(),
                        it.value());
    // + <(rho h)^{-1} ucheck, vcheck>
    for (int e = 0; e < mesh.n_edges(); ++e)
      for (int k = 0; k < spaces.ucheck.count[e]; ++k) {
        int g = spaces.global_ucheck(e, k);
        tu.emplace_back(g, g, 1.0 / (rho * mesh.edges[e].h));
      }
  } else {
    // div regime. ptilde: + <(rho h)^{-1} projected jump of q, same>
    SpMat T = jump_moment_matrix(mesh, spaces, FieldKind::Ucheck);
    if (T.rows() > 0) {
      Eigen::VectorXd dinv(spaces.ucheck.total);
      for (int e = 0; e < mesh.n_edges(); ++e)
        for (int k = 0; k < spaces.ucheck.count[e]; ++k)
          dinv(spaces.ucheck.offset[e] + k) = 1.0 / (rho * mesh.edges[e].h);
      SpMat J = SpMat(T.transpose()) * dinv.asDiagonal() * T;  // p x p block
      for (int c = 0; c < J.outerSize(); ++c)
        for (SpMat::InnerIterator it(J, c); it; ++it)
          tp.emplace_back(spaces.off_p + it.row(), spaces.off_p + it.col(),
                          it.value());
    }
    // + <(rho h)^{-1} pcheck, qcheck>
    for (int e = 0; e < mesh.n_edges(); ++e)
      for (int k = 0; k < spaces.pcheck.count[e]; ++k) {
        int g = spaces.global_pcheck(e, k);
        tp.emplace_back(g, g, 1.0 / (rho * mesh.edges[e].h));
      }
    // utilde: (u, v) + <rho h ucheck, vcheck>
    if (config.deg_u >= 0)
      run_entities(mesh.n_cells(), mode, tu,
                   [&](int c, std::vector<Triplet>& out) {
                     CellGeom g = mesh.cell_geom(c);
                     ScalarEval ue = eval_mapped_scalar(spaces.basis_u, g, tri.points);
                     Eigen::MatrixXd loc =
                         g.det * ue.val.transpose() * tri.weights.asDiagonal() * ue.val;
                     for (int i = 0; i < loc.rows(); ++i)
                       for (int j = 0; j < loc.cols(); ++j)
                         out.emplace_back(spaces.global_u(c, i),
                                          spaces.global_u(c, j), loc(i, j));
                   });
    for (int e = 0; e < mesh.n_edges(); ++e)
      for (int k = 0; k < spaces.ucheck.count[e]; ++k) {
        int g = spaces.global_ucheck(e, k);
        tu.emplace_back(g, g, rho * mesh.edges[e].h);
      }
  }

  nm.n_ptilde = to_sparse(spaces.total, tp);
  nm.n_utilde = to_sparse(spaces.total, tu);
  return nm;
}

Eigen::VectorXd SolutionFields::seg_p() const {
  return x.segment(spaces->off_p, spaces->p.total);
}
Eigen::VectorXd SolutionFields::seg_pcheck() const {
  return x.segment(spaces->off_pcheck, spaces->pcheck.total);
}
Eigen::VectorXd SolutionFields::seg_u() const {
  return x.segment(spaces->off_u, spaces->u.total);
}
Eigen::VectorXd SolutionFields::seg_ucheck() const {
  return x.segment(spaces->off_ucheck, spaces->ucheck.total);
}

void SolutionFields::eval_u(int cell, const Eigen::MatrixXd& ref_pts,
                            Eigen::VectorXd& val, Eigen::VectorXd& gx,
                            Eigen::VectorXd& gy) const {
  int n = ref_pts.rows();
  val.setZero(n);
  gx.setZero(n);
  gy.setZero(n);
  if (spaces->config.deg_u < 0) return;
  CellGeom g = mesh->cell_geom(cell);
  ScalarEval ue = eval_mapped_scalar(spaces->basis_u, g, ref_pts);
  Eigen::VectorXd coef = x.segment(spaces->global_u(cell, 0), spaces->basis_u.dim);
  val = ue.val * coef;
  gx = ue.gx * coef;
  gy = ue.gy * coef;
}

void SolutionFields::eval_p(int cell, const Eigen::MatrixXd& ref_pts,
                            Eigen::VectorXd& vx, Eigen::VectorXd& vy,
                            Eigen::VectorXd& div) const {
  int n = ref_pts.rows();
  vx.setZero(n);
  vy.setZero(n);
  div.setZero(n);
  if (spaces->config.deg_p < 0) return;
  CellGeom g = mesh->cell_geom(cell);
  VectorEval qe = eval_mapped_vector(spaces->basis_p, g, ref_pts);
  Eigen::VectorXd coef = x.segment(spaces->global_p(cell, 0), spaces->basis_p.dim);
  vx = qe.vx * coef;
  vy = qe.vy * coef;
  div = qe.div * coef;
}

Eigen::VectorXd SolutionFields::eval_ucheck(int edge,
                                            const Eigen::VectorXd& t) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(t.size());
  int n = spaces->ucheck.count[edge];
  if (n == 0) return out;
  Eigen::MatrixXd phi = spaces->basis_ucheck.eval(t) /
                        std::sqrt(mesh->edges[edge].h);
  return phi * x.segment(spaces->global_ucheck(edge, 0), n);
}

Eigen::VectorXd SolutionFields::eval_pcheck(int edge,
                                            const Eigen::VectorXd& t) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(t.size());
  int n = spaces->pcheck.count[edge];
  if (n == 0) return out;
  Eigen::MatrixXd phi = spaces->basis_pcheck.eval(t) /
                        std::sqrt(mesh->edges[edge].h);
  return phi * x.segment(spaces->global_pcheck(edge, 0), n);
}

void dump_coo(const SpMat& m, std::ostream& os) {
  os.precision(17);
  for (int c = 0; c < m.outerSize(); ++c)
    for (SpMat::InnerIterator it(m, c); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace xg
