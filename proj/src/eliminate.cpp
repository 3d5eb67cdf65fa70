#include "xg/eliminate.hpp"

#include <stdexcept>

namespace xg {

namespace {

SpMat selection(const std::vector<int>& idx, int n) {
  SpMat s(static_cast<int>(idx.size()), n);
  std::vector<Triplet> t;
  for (int i = 0; i < static_cast<int>(idx.size()); ++i)
    t.emplace_back(i, idx[i], 1.0);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

std::vector<int> field_indices(const Spaces& sp, FieldKind kind) {
  int off = 0, count = 0;
  switch (kind) {
    case FieldKind::P: off = sp.off_p; count = sp.p.total; break;
    case FieldKind::Pcheck: off = sp.off_pcheck; count = sp.pcheck.total; break;
    case FieldKind::U: off = sp.off_u; count = sp.u.total; break;
    case FieldKind::Ucheck: off = sp.off_ucheck; count = sp.ucheck.total; break;
  }
  std::vector<int> idx(count);
  for (int i = 0; i < count; ++i) idx[i] = off + i;
  return idx;
}

ReducedSystem identity_transform(const BlockSystem& sys,
                                 const std::string& name) {
  ReducedSystem r;
  r.name = name;
  r.full_size = static_cast<int>(sys.M.rows());
  r.M = sys.M;
  r.rhs = sys.rhs;
  r.reconstruct = [](const Eigen::VectorXd& x) { return x; };
  return r;
}

// Trace tables on one edge side for the inclusion checks and the average
// moment matrices.
Eigen::MatrixXd side_table(const Mesh2D& mesh, const Spaces& sp, int cell,
                           int e, const QuadRule& seg, bool scalar_u) {
  CellGeom g = mesh.cell_geom(cell);
  const EdgeInfo& edge = mesh.edges[e];
  Vec2 a = mesh.vertices[edge.v0], b = mesh.vertices[edge.v1];
  Eigen::MatrixXd ref(seg.size(), 2);
  for (int q = 0; q < seg.size(); ++q) {
    Vec2 x = a + seg.points(q, 0) * (b - a);
    ref.row(q) = (g.Binv * (x - g.v0)).transpose();
  }
  if (scalar_u) return eval_mapped_scalar(sp.basis_u, g, ref).val;
  VectorEval qe = eval_mapped_vector(sp.basis_p, g, ref);
  return qe.vx * edge.normal.x() + qe.vy * edge.normal.y();
}

// Largest edgewise L2 projection residual of the given cell-field traces
// (scalar values or normal fluxes) onto the check space, over its active
// edges. Zero means the inclusion condition holds.
double trace_inclusion_residual(const Mesh2D& mesh, const Spaces& sp,
                                FieldKind check_field, bool scalar_u) {
  const DofMap& cmap =
      check_field == FieldKind::Pcheck ? sp.pcheck : sp.ucheck;
  const EdgeBasis& cbasis =
      check_field == FieldKind::Pcheck ? sp.basis_pcheck : sp.basis_ucheck;
  const QuadRule seg = quad_edge(form_quadrature_degree(sp.config) + 4);
  double worst = 0.0;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    if (cmap.count[e] == 0) continue;
    const EdgeInfo& edge = mesh.edges[e];
    Eigen::MatrixXd phi = cbasis.eval(seg.points.col(0));  // reference scale
    std::vector<int> cells = {edge.cell_plus};
    if (!edge.is_boundary()) cells.push_back(edge.cell_minus);
    for (int c : cells) {
      Eigen::MatrixXd tab = side_table(mesh, sp, c, e, seg, scalar_u);
      for (int i = 0; i < tab.cols(); ++i) {
        Eigen::VectorXd f = tab.col(i);
        Eigen::VectorXd coef = phi.transpose() * seg.weights.asDiagonal() * f;
        Eigen::VectorXd r = f - phi * coef;
        double res = std::sqrt((r.array().square() * seg.weights.array()).sum());
        double scale = std::max(1.0, std::sqrt((f.array().square() *
                                                seg.weights.array()).sum()));
        worst = std::max(worst, res / scale);
      }
    }
  }
  return worst;
}

void require_quarter_product(const Mesh2D& mesh, const Spaces& sp,
                             const char* what) {
  for (int e = 0; e < mesh.n_edges(); ++e) {
    if (sp.pcheck.count[e] == 0 && sp.ucheck.count[e] == 0) continue;
    double prod = sp.config.tau(mesh.edges[e]) * sp.config.eta(mesh.edges[e]);
    if (std::abs(prod - 0.25) > 1e-12)
      throw std::invalid_argument(std::string(what) +
                                  ": requires eta = tau^{-1}/4 (set the "
                                  "penalty constant to 1/4)");
  }
}

}  // namespace

SpMat avg_moment_matrix(const Mesh2D& mesh, const Spaces& spaces,
                        FieldKind check_field) {
  const bool for_p = check_field == FieldKind::Pcheck;
  const DofMap& cmap = for_p ? spaces.pcheck : spaces.ucheck;
  const EdgeBasis& cbasis = for_p ? spaces.basis_pcheck : spaces.basis_ucheck;
  const DofMap& fmap = for_p ? spaces.p : spaces.u;
  const QuadRule seg = quad_edge(form_quadrature_degree(spaces.config));
  std::vector<Triplet> trips;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const EdgeInfo& edge = mesh.edges[e];
    if (cmap.count[e] == 0) continue;
    Eigen::MatrixXd chk =
        cbasis.eval(seg.points.col(0)) / std::sqrt(edge.h);
    std::vector<int> cells = {edge.cell_plus};
    if (!edge.is_boundary()) cells.push_back(edge.cell_minus);
    for (int s = 0; s < static_cast<int>(cells.size()); ++s) {
      Eigen::MatrixXd tab = side_table(mesh, spaces, cells[s], e, seg, !for_p);
      for (int q = 0; q < seg.size(); ++q) {
        double w = seg.weights(q) * edge.h;
        for (int i = 0; i < tab.cols(); ++i) {
          EdgeTraces t =
              for_p ? (s == 0 ? dg_average_jump(edge, 0, 0, tab(q, i), 0)
                              : dg_average_jump(edge, 0, 0, 0, tab(q, i)))
                    : (s == 0 ? dg_average_jump(edge, tab(q, i), 0, 0, 0)
                              : dg_average_jump(edge, 0, tab(q, i), 0, 0));
          double avg = for_p ? t.avg_q_e : t.avg_v;
          if (avg == 0.0) continue;
          int col = fmap.offset[cells[s]] + i;
          for (int k = 0; k < cmap.count[e]; ++k)
            trips.emplace_back(cmap.offset[e] + k, col, w * avg * chk(q, k));
        }
      }
    }
  }
  SpMat m(cmap.total, fmap.total);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

ReducedSystem schur_eliminate(const SpMat& M, const Eigen::VectorXd& rhs,
                              std::vector<int> elim, const std::string& name) {
  const int n = static_cast<int>(M.rows());
  std::sort(elim.begin(), elim.end());
  std::vector<char> is_elim(n, 0);
  for (int i : elim) is_elim[i] = 1;
  std::vector<int> keep;
  keep.reserve(n - elim.size());
  for (int i = 0; i < n; ++i)
    if (!is_elim[i]) keep.push_back(i);

  SpMat Sk = selection(keep, n), Se = selection(elim, n);
  SpMat Mee = SpMat(Se * M * Se.transpose());
  Eigen::VectorXd dinv(elim.size());
  dinv.setZero();
  for (int c = 0; c < Mee.outerSize(); ++c)
    for (SpMat::InnerIterator it(Mee, c); it; ++it) {
      if (it.row() != it.col() && it.value() != 0.0)
        throw std::invalid_argument(
            name + ": eliminated block is not diagonal");
      if (it.row() == it.col()) dinv(it.row()) = 1.0 / it.value();
    }
  for (int i = 0; i < static_cast<int>(elim.size()); ++i)
    if (!(std::isfinite(dinv(i)) && dinv(i) != 0.0))
      throw std::invalid_argument(name +
                                  ": eliminated block has a zero pivot");

  SpMat Mke = SpMat(Sk * M * Se.transpose());
  SpMat Mek = SpMat(Se * M * Sk.transpose());
  Eigen::VectorXd re(elim.size()), rk(keep.size());
  for (size_t i = 0; i < elim.size(); ++i) re(i) = rhs(elim[i]);
  for (size_t i = 0; i < keep.size(); ++i) rk(i) = rhs(keep[i]);

  ReducedSystem r;
  r.name = name;
  r.full_size = n;
  r.M = SpMat(Sk * M * Sk.transpose()) - SpMat(Mke * dinv.asDiagonal() * Mek);
  r.rhs = rk - Mke * (dinv.asDiagonal() * re);
  r.reconstruct = [n, keep, elim, dinv, Mek, re](const Eigen::VectorXd& xk) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
    for (size_t i = 0; i < keep.size(); ++i) full(keep[i]) = xk(i);
    Eigen::VectorXd xe = dinv.asDiagonal() * (re - Mek * xk);
    for (size_t i = 0; i < elim.size(); ++i) full(elim[i]) = xe(i);
    return full;
  };
  return r;
}

ReducedSystem eliminate_pcheck(const Mesh2D& mesh, const BlockSystem& system) {
  (void)mesh;
  const Spaces& sp = system.spaces;
  if (sp.pcheck.total == 0) return identity_transform(system, "pcheck");
  return schur_eliminate(system.M, system.rhs,
                         field_indices(sp, FieldKind::Pcheck), "pcheck");
}

ReducedSystem eliminate_ucheck(const Mesh2D& mesh, const BlockSystem& system) {
  (void)mesh;
  const Spaces& sp = system.spaces;
  if (sp.ucheck.total == 0) return identity_transform(system, "ucheck");
  return schur_eliminate(system.M, system.rhs,
                         field_indices(sp, FieldKind::Ucheck), "ucheck");
}

ReducedSystem eliminate_both(const Mesh2D& mesh, const BlockSystem& system) {
  (void)mesh;
  const Spaces& sp = system.spaces;
  std::vector<int> elim = field_indices(sp, FieldKind::Pcheck);
  std::vector<int> uc = field_indices(sp, FieldKind::Ucheck);
  elim.insert(elim.end(), uc.begin(), uc.end());
  if (elim.empty()) return identity_transform(system, "both");
  return schur_eliminate(system.M, system.rhs, elim, "both");
}

ReducedSystem hybridize_uhat(const Mesh2D& mesh, const BlockSystem& system) {
  const Spaces& sp = system.spaces;
  if (trace_inclusion_residual(mesh, sp, FieldKind::Ucheck,
                               /*scalar_u=*/false) > 1e-12)
    throw std::invalid_argument(
        "hybridize_uhat: normal traces of Q_h are not contained in Vcheck_h");
  if (trace_inclusion_residual(mesh, sp, FieldKind::Ucheck,
                               /*scalar_u=*/true) > 1e-12)
    throw std::invalid_argument(
        "hybridize_uhat: traces of V_h are not contained in Vcheck_h");
  require_quarter_product(mesh, sp, "hybridize_uhat");

  const int n = static_cast<int>(system.M.rows());
  ReducedSystem red3 = eliminate_pcheck(mesh, system);
  // index layout of the 3-field system: p, u, ucheck (pcheck removed)
  const int np = sp.p.total, nu = sp.u.total, nc = sp.ucheck.total;
  const int n3 = np + nu + nc;
  if (red3.M.rows() != n3)
    throw std::logic_error("hybridize_uhat: unexpected reduced layout");

  // change of variables: old ucheck = uhat - T u, T = projected average
  SpMat T = avg_moment_matrix(mesh, sp, FieldKind::Ucheck);
  std::vector<Triplet> zt;
  for (int i = 0; i < n3; ++i) zt.emplace_back(i, i, 1.0);
  for (int c = 0; c < T.outerSize(); ++c)
    for (SpMat::InnerIterator it(T, c); it; ++it)
      zt.emplace_back(np + nu + it.row(), np + it.col(), -it.value());
  SpMat Z(n3, n3);
  Z.setFromTriplets(zt.begin(), zt.end());
  SpMat Mh = SpMat(Z.transpose() * red3.M * Z);
  Eigen::VectorXd rh = Z.transpose() * red3.rhs;

  // cell ownership of the kept (p, u) unknowns
  std::vector<int> owner(np + nu, -1);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    for (int i = 0; i < sp.p.count[c]; ++i) owner[sp.p.offset[c] + i] = c;
    for (int i = 0; i < sp.u.count[c]; ++i)
      owner[np + sp.u.offset[c] + i] = c;
  }
  double scale = 0.0;
  for (int c = 0; c < Mh.outerSize(); ++c)
    for (SpMat::InnerIterator it(Mh, c); it; ++it)
      scale = std::max(scale, std::abs(it.value()));
  for (int c = 0; c < Mh.outerSize(); ++c)
    for (SpMat::InnerIterator it(Mh, c); it; ++it) {
      if (it.row() >= np + nu || it.col() >= np + nu) continue;
      if (owner[it.row()] != owner[it.col()] &&
          std::abs(it.value()) > 1e-10 * scale)
        throw std::invalid_argument(
            "hybridize_uhat: interior block is not cell-local after the "
            "change of variables");
    }

  // per-cell condensation onto uhat
  Eigen::MatrixXd S = Eigen::MatrixXd(
      SpMat(Mh.block(np + nu, np + nu, nc, nc)));
  Eigen::VectorXd rs = rh.tail(nc);
  Eigen::MatrixXd Mh_d = Eigen::MatrixXd(Mh);  // coarse meshes only
  std::vector<std::vector<int>> cell_dofs(mesh.n_cells());
  for (int i = 0; i < np + nu; ++i)
    if (owner[i] >= 0) cell_dofs[owner[i]].push_back(i);
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu(mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& dofs = cell_dofs[c];
    const int m = static_cast<int>(dofs.size());
    Eigen::MatrixXd L(m, m);
    Eigen::MatrixXd K(m, nc);
    Eigen::VectorXd rc(m);
    for (int i = 0; i < m; ++i) {
      rc(i) = rh(dofs[i]);
      for (int j = 0; j < m; ++j) L(i, j) = Mh_d(dofs[i], dofs[j]);
      for (int j = 0; j < nc; ++j) K(i, j) = Mh_d(dofs[i], np + nu + j);
    }
    lu[c].compute(L);
    Eigen::MatrixXd Linv_K = lu[c].solve(K);
    S -= K.transpose() * Linv_K;
    rs -= K.transpose() * lu[c].solve(rc);
  }

  ReducedSystem out;
  out.name = "hybridized-uhat";
  out.full_size = n;
  out.M = S.sparseView();
  out.rhs = rs;
  auto red3rec = red3.reconstruct;
  out.reconstruct = [=, &mesh](const Eigen::VectorXd& uhat) {
    Eigen::VectorXd x3 = Eigen::VectorXd::Zero(n3);
    x3.tail(nc) = uhat;  // temporarily in hat variables
    for (int c = 0; c < static_cast<int>(cell_dofs.size()); ++c) {
      const auto& dofs = cell_dofs[c];
      const int m = static_cast<int>(dofs.size());
      Eigen::VectorXd rc(m);
      for (int i = 0; i < m; ++i) {
        rc(i) = rh(dofs[i]);
        for (int j = 0; j < nc; ++j)
          rc(i) -= Mh_d(dofs[i], np + nu + j) * uhat(j);
      }
      Eigen::VectorXd xc = lu[c].solve(rc);
      for (int i = 0; i < m; ++i) x3(dofs[i]) = xc(i);
    }
    // back to (p, u, ucheck) variables, then reinsert pcheck
    Eigen::VectorXd x3_orig = Z * x3;
    return red3rec(x3_orig);
  };
  return out;
}

ReducedSystem assemble_wg_phat(const Mesh2D& mesh, const BlockSystem& system) {
  const Spaces& sp = system.spaces;
  if (trace_inclusion_residual(mesh, sp, FieldKind::Pcheck,
                               /*scalar_u=*/false) > 1e-12)
    throw std::invalid_argument(
        "assemble_wg_phat: normal traces of Q_h are not contained in "
        "Qcheck_h");
  require_quarter_product(mesh, sp, "assemble_wg_phat");

  const int n = static_cast<int>(system.M.rows());
  ReducedSystem red3 = eliminate_ucheck(mesh, system);
  const int np = sp.p.total, npc = sp.pcheck.total, nu = sp.u.total;
  const int n3 = np + npc + nu;
  if (red3.M.rows() != n3)
    throw std::logic_error("assemble_wg_phat: unexpected reduced layout");

  // old pcheck = phat - T p
  SpMat T = avg_moment_matrix(mesh, sp, FieldKind::Pcheck);
  std::vector<Triplet> zt;
  for (int i = 0; i < n3; ++i) zt.emplace_back(i, i, 1.0);
  for (int c = 0; c < T.outerSize(); ++c)
    for (SpMat::InnerIterator it(T, c); it; ++it)
      zt.emplace_back(np + it.row(), it.col(), -it.value());
  SpMat Z(n3, n3);
  Z.setFromTriplets(zt.begin(), zt.end());

  ReducedSystem out;
  out.name = "wg-phat";
  out.full_size = n;
  out.M = SpMat(Z.transpose() * red3.M * Z);
  out.rhs = Z.transpose() * red3.rhs;
  auto red3rec = red3.reconstruct;
  out.reconstruct = [n3, Z, red3rec](const Eigen::VectorXd& xh) {
    Eigen::VectorXd x3 = Z * xh;
    return red3rec(x3);
  };
  return out;
}

}  // namespace xg
