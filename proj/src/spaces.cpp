#include "xg/spaces.hpp"

namespace xg {

ProblemData zero_data() {
  ProblemData d;
  d.alpha = [](const Vec2&) { return Mat2::Identity(); };
  d.f = [](const Vec2&) { return 0.0; };
  d.g_dirichlet = [](const Vec2&) { return 0.0; };
  d.g_neumann = [](const Vec2&) { return 0.0; };
  return d;
}

namespace {

DofMap build_cell_map(FieldKind kind, int n_cells, int per_cell) {
  DofMap map;
  map.kind = kind;
  map.offset.assign(n_cells, -1);
  map.count.assign(n_cells, per_cell);
  for (int c = 0; c < n_cells; ++c) {
    map.offset[c] = map.total;
    map.total += per_cell;
  }
  return map;
}

DofMap build_edge_map(FieldKind kind, const Mesh2D& mesh, int degree) {
  // Pcheck vanishes on Neumann edges, Ucheck on Dirichlet edges
  EdgeTag constrained =
      kind == FieldKind::Pcheck ? EdgeTag::Neumann : EdgeTag::Dirichlet;
  DofMap map;
  map.kind = kind;
  map.offset.assign(mesh.n_edges(), -1);
  map.count.assign(mesh.n_edges(), 0);
  for (int e = 0; e < mesh.n_edges(); ++e) {
    if (degree < 0 || mesh.edges[e].tag == constrained) continue;
    map.offset[e] = map.total;
    map.count[e] = degree + 1;
    map.total += degree + 1;
  }
  return map;
}

}  // namespace

Spaces build_spaces(const Mesh2D& mesh, const MethodConfig& config) {
  Spaces sp;
  sp.config = config;
  if (config.deg_p >= 0) sp.basis_p = make_basis(config.q_family, config.deg_p);
  if (config.deg_u >= 0) sp.basis_u = make_basis(Family::ScalarPk, config.deg_u);
  sp.basis_pcheck.degree = config.deg_pcheck;
  sp.basis_ucheck.degree = config.deg_ucheck;
  int pdim = config.deg_p >= 0 ? sp.basis_p.dim : 0;
  int udim = config.deg_u >= 0 ? sp.basis_u.dim : 0;
  sp.p = build_cell_map(FieldKind::P, mesh.n_cells(), pdim);
  sp.u = build_cell_map(FieldKind::U, mesh.n_cells(), udim);
  sp.pcheck = build_edge_map(FieldKind::Pcheck, mesh, config.deg_pcheck);
  sp.ucheck = build_edge_map(FieldKind::Ucheck, mesh, config.deg_ucheck);
  sp.off_p = 0;
  sp.off_pcheck = sp.p.total;
  sp.off_u = sp.off_pcheck + sp.pcheck.total;
  sp.off_ucheck = sp.off_u + sp.u.total;
  sp.total = sp.off_ucheck + sp.ucheck.total;
  return sp;
}

EdgeProjector make_edge_projector(const Mesh2D& mesh, const Spaces& spaces,
                                  FieldKind check_field) {
  EdgeProjector proj;
  proj.mesh = &mesh;
  if (check_field == FieldKind::Pcheck) {
    proj.dofmap = &spaces.pcheck;
    proj.basis = spaces.basis_pcheck;
  } else {
    proj.dofmap = &spaces.ucheck;
    proj.basis = spaces.basis_ucheck;
  }
  return proj;
}

Eigen::VectorXd project_edge(
    const EdgeProjector& projector,
    const std::function<double(int, const Vec2&)>& trace_fn, int quad_degree) {
  const Mesh2D& mesh = *projector.mesh;
  const DofMap& map = *projector.dofmap;
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(map.total);
  if (projector.basis.degree < 0) return coeffs;
  QuadRule rule = quad_edge(quad_degree);
  Eigen::MatrixXd phi = projector.basis.eval(rule.points.col(0));
  for (int e = 0; e < mesh.n_edges(); ++e) {
    if (map.count[e] == 0) continue;
    const EdgeInfo& edge = mesh.edges[e];
    Vec2 a = mesh.vertices[edge.v0], b = mesh.vertices[edge.v1];
    double scale = 1.0 / std::sqrt(edge.h);  // physical orthonormal basis
    for (int q = 0; q < rule.size(); ++q) {
      Vec2 x = a + rule.points(q, 0) * (b - a);
      double w = rule.weights(q) * edge.h * trace_fn(e, x);
      for (int i = 0; i < map.count[e]; ++i)
        coeffs(map.offset[e] + i) += w * phi(q, i) * scale;
    }
  }
  return coeffs;
}

}  // namespace xg
