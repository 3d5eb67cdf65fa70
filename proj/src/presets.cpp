#include "xg/presets.hpp"

#include <Eigen/Dense>

#include "xg/spaces.hpp"

namespace {

using namespace xg;

constexpr double kIncludeTol = 1e-10;

// relative residual of the weighted least-squares fit of b by the columns
// of A (weights already folded into both)
double lsq_residual(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  double bn = b.norm();
  if (bn == 0.0) return 0.0;
  if (A.cols() == 0) return 1.0;
  Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  return (b - A * c).norm() / bn;
}

struct CheckContext {
  Mesh2D mesh;
  Spaces spaces;
  QuadRule cell_rule;
  QuadRule edge_rule;

  explicit CheckContext(const MethodConfig& cfg)
      : mesh(tag_boundary(
            build_structured_unit_square(1),
            [](const Vec2& x) {
              return x.x() > 1 - 1e-12 ? EdgeTag::Neumann : EdgeTag::Dirichlet;
            })),
        spaces(build_spaces(mesh, cfg)) {
    int d = 2 * (std::max({cfg.deg_p, cfg.deg_u, cfg.deg_pcheck,
                           cfg.deg_ucheck, 1}) +
                 2);
    cell_rule = quad_triangle(std::min(d, kMaxTriangleDegree));
    edge_rule = quad_edge(std::min(d, kMaxEdgeDegree));
  }
};

// columns of the weighted sample matrix of the vector flux basis on a cell,
// components stacked
Eigen::MatrixXd flux_samples(const CheckContext& cx, int cell) {
  if (cx.spaces.basis_p.dim == 0)
    return Eigen::MatrixXd(2 * cx.cell_rule.size(), 0);
  CellGeom geom = cx.mesh.cell_geom(cell);
  VectorEval ev =
      eval_mapped_vector(cx.spaces.basis_p, geom, cx.cell_rule.points);
  Eigen::MatrixXd A(2 * cx.cell_rule.size(), cx.spaces.basis_p.dim);
  for (int q = 0; q < cx.cell_rule.size(); ++q) {
    double w = std::sqrt(cx.cell_rule.weights(q) * geom.det);
    A.row(q) = w * ev.vx.row(q);
    A.row(cx.cell_rule.size() + q) = w * ev.vy.row(q);
  }
  return A;
}

// gradient inclusion grad_h V_h in Q_h, worst relative residual
double grad_in_q_residual(const CheckContext& cx) {
  double worst = 0.0;
  for (int c = 0; c < cx.mesh.n_cells(); ++c) {
    CellGeom geom = cx.mesh.cell_geom(c);
    Eigen::MatrixXd A = flux_samples(cx, c);
    ScalarEval su =
        eval_mapped_scalar(cx.spaces.basis_u, geom, cx.cell_rule.points);
    for (int i = 0; i < cx.spaces.basis_u.dim; ++i) {
      Eigen::VectorXd b(A.rows());
      for (int q = 0; q < cx.cell_rule.size(); ++q) {
        double w = std::sqrt(cx.cell_rule.weights(q) * geom.det);
        b(q) = w * su.gx(q, i);
        b(cx.cell_rule.size() + q) = w * su.gy(q, i);
      }
      worst = std::max(worst, lsq_residual(A, b));
    }
  }
  return worst;
}

// div_h Q_h in V_h (dir=0) and V_h in div_h Q_h (dir=1)
double div_v_residual(const CheckContext& cx, int dir) {
  double worst = 0.0;
  for (int c = 0; c < cx.mesh.n_cells(); ++c) {
    CellGeom geom = cx.mesh.cell_geom(c);
    VectorEval ep =
        eval_mapped_vector(cx.spaces.basis_p, geom, cx.cell_rule.points);
    ScalarEval su =
        eval_mapped_scalar(cx.spaces.basis_u, geom, cx.cell_rule.points);
    Eigen::VectorXd w = (cx.cell_rule.weights * geom.det).cwiseSqrt();
    Eigen::MatrixXd div = w.asDiagonal() * ep.div;
    Eigen::MatrixXd val = w.asDiagonal() * su.val;
    const Eigen::MatrixXd& A = dir == 0 ? val : div;
    const Eigen::MatrixXd& B = dir == 0 ? div : val;
    for (int i = 0; i < B.cols(); ++i)
      worst = std::max(worst, lsq_residual(A, B.col(i)));
  }
  return worst;
}

// worst relative residual over every active edge, side and basis function
// of projecting an edge trace of a cell field onto a check space; what
// selects which trace is taken
enum class TraceKind { GradNormal, Div, Value, FluxNormal };

double field_trace_residual(const CheckContext& cx, FieldKind check,
                            TraceKind what) {
  const DofMap& dm =
      check == FieldKind::Pcheck ? cx.spaces.pcheck : cx.spaces.ucheck;
  const EdgeBasis& eb = check == FieldKind::Pcheck ? cx.spaces.basis_pcheck
                                                   : cx.spaces.basis_ucheck;
  const QuadRule& qr = cx.edge_rule;
  Eigen::MatrixXd phi = eb.degree >= 0 ? eb.eval(qr.points.col(0))
                                       : Eigen::MatrixXd(qr.size(), 0);
  double worst = 0.0;
  for (int e = 0; e < cx.mesh.n_edges(); ++e) {
    if (dm.offset[e] < 0) continue;  // constrained edge
    const EdgeInfo& ed = cx.mesh.edges[e];
    for (int side = 0; side < (ed.is_boundary() ? 1 : 2); ++side) {
      int cell = side == 0 ? ed.cell_plus : ed.cell_minus;
      CellGeom geom = cx.mesh.cell_geom(cell);
      Eigen::MatrixXd ref(qr.size(), 2);
      for (int q = 0; q < qr.size(); ++q) {
        Vec2 x = (1.0 - qr.points(q, 0)) * cx.mesh.vertices[ed.v0] +
                 qr.points(q, 0) * cx.mesh.vertices[ed.v1];
        ref.row(q) = (geom.Binv * (x - geom.v0)).transpose();
      }
      Eigen::MatrixXd traces;  // qr.size() x nfuncs
      switch (what) {
        case TraceKind::FluxNormal: {
          VectorEval ev = eval_mapped_vector(cx.spaces.basis_p, geom, ref);
          traces = ev.vx * ed.normal.x() + ev.vy * ed.normal.y();
          break;
        }
        case TraceKind::Div: {
          VectorEval ev = eval_mapped_vector(cx.spaces.basis_p, geom, ref);
          traces = ev.div;
          break;
        }
        case TraceKind::GradNormal: {
          ScalarEval ev = eval_mapped_scalar(cx.spaces.basis_u, geom, ref);
          traces = ev.gx * ed.normal.x() + ev.gy * ed.normal.y();
          break;
        }
        case TraceKind::Value: {
          ScalarEval ev = eval_mapped_scalar(cx.spaces.basis_u, geom, ref);
          traces = ev.val;
          break;
        }
      }
      for (int i = 0; i < traces.cols(); ++i) {
        double norm2 = 0.0;
        for (int q = 0; q < qr.size(); ++q)
          norm2 += qr.weights(q) * ed.h * traces(q, i) * traces(q, i);
        // reconstruct the projection pointwise; norm^2 minus squared moments
        // would cancel catastrophically for members of the span
        Eigen::VectorXd rec = Eigen::VectorXd::Zero(qr.size());
        for (int k = 0; k < dm.count[e]; ++k) {
          double m = 0.0;
          for (int q = 0; q < qr.size(); ++q)
            m += qr.weights(q) * ed.h * traces(q, i) * phi(q, k) /
                 std::sqrt(ed.h);
          rec += m / std::sqrt(ed.h) * phi.col(k);
        }
        double res2 = 0.0;
        for (int q = 0; q < qr.size(); ++q)
          res2 += qr.weights(q) * ed.h * std::pow(traces(q, i) - rec(q), 2);
        if (norm2 > 1e-28)
          worst = std::max(worst, std::sqrt(res2 / norm2));
      }
    }
  }
  return worst;
}

double div_trace_residual(const CheckContext& cx, FieldKind check) {
  return field_trace_residual(cx, check, TraceKind::Div);
}


}  // namespace

namespace xg {

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "hdg-grad", "hdg-div", "hdg-rt",  "hdg-reduced", "hdg-equal",
      "mixed-dg", "wg",      "wg-mfem", "ldg"};
  return names;
}

Preset make_preset(const std::string& name, int k) {
  if (k < 0) throw std::invalid_argument("make_preset: k must be >= 0");
  Preset pr;
  pr.name = name;
  MethodConfig& c = pr.config;
  auto grad = [&](int dp, int dpc, int du, int duc) {
    c.deg_p = dp;
    c.deg_pcheck = dpc;
    c.deg_u = du;
    c.deg_ucheck = duc;
    c.regime = PenaltyRegime::GradBased;
    c.c_eta = 0.25;
    pr.label = "gradient-based";
  };
  auto div = [&](int dp, int dpc, int du, int duc, Family fam) {
    c.deg_p = dp;
    c.deg_pcheck = dpc;
    c.deg_u = du;
    c.deg_ucheck = duc;
    c.q_family = fam;
    c.regime = PenaltyRegime::DivBased;
    c.c_tau = 0.25;
    pr.label = "divergence-based";
  };
  if (name == "hdg-grad") {
    grad(k, k + 1, k + 1, k + 1);
  } else if (name == "hdg-div") {
    div(k + 1, k + 1, k, k + 1, Family::VectorPk);
  } else if (name == "hdg-rt") {
    div(k, k, k, k, Family::BrokenRT);
  } else if (name == "hdg-reduced" || name == "wg-mfem" || name == "grad-k") {
    grad(k, k, k + 1, k);
  } else if (name == "hdg-equal") {
    grad(k, k, k, k);
    pr.label = "not proved";
  } else if (name == "mixed-dg") {
    div(k + 1, -1, k, k, Family::VectorPk);
  } else if (name == "wg") {
    div(k, k, k, k + 1, Family::BrokenRT);
  } else if (name == "ldg") {
    grad(k, k, k + 1, -1);
  } else if (name == "div-rt") {
    div(k, k, k, k, Family::BrokenRT);
  } else if (name == "div-k") {
    // Vcheck of degree k+1 contains the normal traces of the P^{k+1} flux;
    // with Vcheck^k the uncontrolled trace component stalls convergence
    div(k + 1, k, k, k + 1, Family::VectorPk);
  } else {
    throw std::invalid_argument("make_preset: unknown preset '" + name + "'");
  }
  return pr;
}

Preset parse_preset(const std::string& text, int default_k) {
  size_t pos = text.size();
  while (pos > 0 && std::isdigit(static_cast<unsigned char>(text[pos - 1])))
    --pos;
  if (pos < text.size()) {
    std::string base = text.substr(0, pos);
    int k = std::stoi(text.substr(pos));
    try {
      Preset pr = make_preset(base, k);
      pr.name = text;
      return pr;
    } catch (const std::invalid_argument&) {
      // fall through: the digits may be part of the name itself
    }
  }
  return make_preset(text, default_k);
}

std::vector<std::string> check_conditions(const MethodConfig& config) {
  std::vector<std::string> violated;
  if (config.regime == PenaltyRegime::Manual) {
    violated.push_back("manual penalty regime carries no stability theorem");
    return violated;
  }
  CheckContext cx(config);
  if (config.regime == PenaltyRegime::GradBased) {
    if (config.deg_pcheck < 0)
      violated.push_back(
          "gradient condition (a): Qcheck_h does not contain the piecewise "
          "constants");
    if (grad_in_q_residual(cx) > kIncludeTol)
      violated.push_back(
          "gradient condition (b): grad_h V_h is not contained in Q_h");
    if (field_trace_residual(cx, FieldKind::Pcheck, TraceKind::GradNormal) >
        kIncludeTol)
      violated.push_back(
          "gradient condition (c): {grad_h V_h}_e is not contained in "
          "Qcheck_h");
  } else {
    bool stable_pair =
        (config.q_family == Family::BrokenRT && config.deg_p == config.deg_u) ||
        (config.q_family == Family::VectorPk &&
         config.deg_p == config.deg_u + 1);
    if (!stable_pair)
      violated.push_back(
          "divergence condition (a): Q_h with H(div) continuity and V_h are "
          "not a known stable mixed pair");
    if (div_v_residual(cx, 0) > kIncludeTol || div_v_residual(cx, 1) > kIncludeTol)
      violated.push_back(
          "divergence condition (b): div_h Q_h does not equal V_h");
    if (div_trace_residual(cx, FieldKind::Ucheck) > kIncludeTol)
      violated.push_back(
          "divergence condition (c): {div_h Q_h} is not contained in "
          "Vcheck_h");
  }
  return violated;
}

std::vector<std::string> check_primal_limit_conditions(
    const MethodConfig& config) {
  std::vector<std::string> violated;
  if (config.regime != PenaltyRegime::GradBased)
    violated.push_back("primal limit requires the gradient penalty regime");
  CheckContext cx(config);
  if (grad_in_q_residual(cx) > kIncludeTol)
    violated.push_back(
        "primal limit condition (a): grad_h V_h is not contained in Q_h");
  if (field_trace_residual(cx, FieldKind::Pcheck, TraceKind::FluxNormal) >
      kIncludeTol)
    violated.push_back(
        "primal limit condition (b): {Q_h}_e is not contained in Qcheck_h");
  if (config.deg_u < 1)
    violated.push_back("primal limit condition (c): V_h must have degree >= 1");
  // the distance bound controls the full jump of u, which the penalty only
  // sees through its Qcheck_h projection; without trace containment the
  // uncontrolled jump component persists as rho -> 0
  if (field_trace_residual(cx, FieldKind::Pcheck, TraceKind::Value) >
      kIncludeTol)
    violated.push_back(
        "primal limit jump control: traces of V_h are not contained in "
        "Qcheck_h");
  return violated;
}

std::vector<std::string> check_mixed_limit_conditions(
    const MethodConfig& config) {
  std::vector<std::string> violated;
  if (config.regime != PenaltyRegime::DivBased)
    violated.push_back("mixed limit requires the divergence penalty regime");
  CheckContext cx(config);
  if (div_v_residual(cx, 0) > kIncludeTol || div_v_residual(cx, 1) > kIncludeTol)
    violated.push_back(
        "mixed limit condition (a): div_h Q_h does not equal V_h");
  if (field_trace_residual(cx, FieldKind::Ucheck, TraceKind::Value) >
      kIncludeTol)
    violated.push_back(
        "mixed limit condition (b): {V_h} is not contained in Vcheck_h");
  bool flux_ok =
      (config.q_family == Family::BrokenRT && config.deg_p == config.deg_u) ||
      (config.q_family == Family::VectorPk && config.deg_p == config.deg_u + 1);
  if (!flux_ok)
    violated.push_back(
        "mixed limit condition (c): flux space must be RT^k or P^{k+1}");
  // analogous to the primal case: the distance controls the full normal
  // jump of p, which the penalty only sees through Vcheck_h
  if (field_trace_residual(cx, FieldKind::Ucheck, TraceKind::FluxNormal) >
      kIncludeTol)
    violated.push_back(
        "mixed limit jump control: normal traces of Q_h are not contained in "
        "Vcheck_h");
  return violated;
}

}  // namespace xg
