#include "xg/verify.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "xg/linalg.hpp"
#include "xg/presets.hpp"

namespace {

using namespace xg;

constexpr double kPi = 3.14159265358979323846;

Eigen::MatrixXd edge_ref_points(const Mesh2D& mesh, int cell, int edge,
                                const Eigen::VectorXd& t) {
  const EdgeInfo& ed = mesh.edges[edge];
  CellGeom geom = mesh.cell_geom(cell);
  Eigen::MatrixXd ref(t.size(), 2);
  for (int j = 0; j < t.size(); ++j) {
    Vec2 x = (1.0 - t(j)) * mesh.vertices[ed.v0] + t(j) * mesh.vertices[ed.v1];
    ref.row(j) = (geom.Binv * (x - geom.v0)).transpose();
  }
  return ref;
}

ManufacturedCase zeroed_copy(const ManufacturedCase& mc) {
  ManufacturedCase z = mc;
  z.id = mc.id + "-zero";
  z.u = [](const Vec2&) { return 0.0; };
  z.grad_u = [](const Vec2&) { return Vec2::Zero().eval(); };
  z.p = [](const Vec2&) { return Vec2::Zero().eval(); };
  z.f = [](const Vec2&) { return 0.0; };
  return z;
}

double least_squares_slope(const std::vector<double>& logx,
                           const std::vector<double>& logy) {
  const int n = static_cast<int>(logx.size());
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += logx[i];
    my += logy[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (logx[i] - mx) * (logx[i] - mx);
    sxy += (logx[i] - mx) * (logy[i] - my);
  }
  return sxy / sxx;
}

}  // namespace

namespace xg {

Vec2 unit_square_normal(const Vec2& x) {
  const double tol = 1e-12;
  if (x.x() < tol) return {-1.0, 0.0};
  if (x.x() > 1.0 - tol) return {1.0, 0.0};
  if (x.y() < tol) return {0.0, -1.0};
  if (x.y() > 1.0 - tol) return {0.0, 1.0};
  throw std::invalid_argument("unit_square_normal: point not on the boundary");
}

ProblemData ManufacturedCase::data() const {
  ProblemData d;
  d.alpha = alpha;
  d.f = f;
  d.g_dirichlet = u;
  auto pf = p;
  d.g_neumann = [pf](const Vec2& x) { return pf(x).dot(unit_square_normal(x)); };
  return d;
}

const std::vector<ManufacturedCase>& builtin_cases() {
  static const std::vector<ManufacturedCase> cases = [] {
    std::vector<ManufacturedCase> cs;
    auto ident = [](const Vec2&) { return Mat2::Identity().eval(); };

    ManufacturedCase c1;
    c1.id = "C1";
    c1.u = [](const Vec2& x) {
      return std::sin(kPi * x.x()) * std::sin(kPi * x.y());
    };
    c1.grad_u = [](const Vec2& x) {
      return Vec2(kPi * std::cos(kPi * x.x()) * std::sin(kPi * x.y()),
                  kPi * std::sin(kPi * x.x()) * std::cos(kPi * x.y()));
    };
    c1.alpha = ident;
    c1.p = [g = c1.grad_u](const Vec2& x) { return Vec2(-g(x)); };
    c1.f = [](const Vec2& x) {
      return 2.0 * kPi * kPi * std::sin(kPi * x.x()) * std::sin(kPi * x.y());
    };
    cs.push_back(c1);

    ManufacturedCase c2;
    c2.id = "C2";
    c2.exact_degree = 2;
    c2.u = [](const Vec2& x) { return x.x() * x.x() + x.x() * x.y(); };
    c2.grad_u = [](const Vec2& x) {
      return Vec2(2.0 * x.x() + x.y(), x.x());
    };
    c2.alpha = ident;
    c2.p = [](const Vec2& x) {
      return Vec2(-(2.0 * x.x() + x.y()), -x.x());
    };
    c2.f = [](const Vec2&) { return -2.0; };
    cs.push_back(c2);

    ManufacturedCase c3;
    c3.id = "C3";
    c3.u = c1.u;
    c3.grad_u = c1.grad_u;
    c3.alpha = [](const Vec2& x) {
      Mat2 a = Mat2::Zero();
      a(0, 0) = 1.0 + x.x() * x.x();
      a(1, 1) = 1.0 + x.y() * x.y();
      return a;
    };
    c3.p = [a = c3.alpha, g = c3.grad_u](const Vec2& x) {
      return Vec2(-(a(x) * g(x)));
    };
    c3.f = [](const Vec2& x) {
      double sx = std::sin(kPi * x.x()), sy = std::sin(kPi * x.y());
      double cx = std::cos(kPi * x.x()), cy = std::cos(kPi * x.y());
      return -2.0 * kPi * x.x() * cx * sy - 2.0 * kPi * x.y() * sx * cy +
             kPi * kPi * (2.0 + x.x() * x.x() + x.y() * x.y()) * sx * sy;
    };
    cs.push_back(c3);
    return cs;
  }();
  return cases;
}

const ManufacturedCase& find_case(const std::string& id) {
  for (const ManufacturedCase& mc : builtin_cases())
    if (mc.id == id) return mc;
  throw std::invalid_argument("find_case: unknown case '" + id + "'");
}

std::array<std::string, 4> norm_names(PenaltyRegime regime) {
  if (regime == PenaltyRegime::GradBased)
    return {"p_0c", "pcheck_rh", "u_1rh", "ucheck_irh"};
  return {"p_divrh", "pcheck_irh", "u_0", "ucheck_rh"};
}

std::array<double, 4> error_norms(const SolutionFields& sol,
                                  const ManufacturedCase& mc,
                                  const MethodConfig& config,
                                  PenaltyRegime regime) {
  if (regime == PenaltyRegime::Manual)
    throw std::invalid_argument("error_norms: no norm pair for manual regime");
  const Mesh2D& mesh = *sol.mesh;
  const Spaces& sp = *sol.spaces;
  const double rho = config.rho;
  int qd = std::min(form_quadrature_degree(config) + 4, kMaxTriangleDegree);
  QuadRule cq = quad_triangle(qd);
  QuadRule eq = quad_edge(std::min(qd, kMaxEdgeDegree));

  double e2_pc = 0.0, e2_div = 0.0, e2_grad = 0.0, e2_u0 = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    CellGeom geom = mesh.cell_geom(c);
    Eigen::VectorXd vx, vy, dv, uv, gx, gy;
    sol.eval_p(c, cq.points, vx, vy, dv);
    sol.eval_u(c, cq.points, uv, gx, gy);
    for (int q = 0; q < cq.size(); ++q) {
      Vec2 x = geom.v0 + geom.B * Vec2(cq.points(q, 0), cq.points(q, 1));
      double w = cq.weights(q) * geom.det;
      Vec2 dp = mc.p(x) - Vec2(vx(q), vy(q));
      Mat2 cw = mc.alpha(x).inverse();
      e2_pc += w * dp.dot(cw * dp);
      e2_div += w * std::pow(mc.f(x) - dv(q), 2);  // div p = f
      Vec2 dg = mc.grad_u(x) - Vec2(gx(q), gy(q));
      e2_grad += w * dg.squaredNorm();
      e2_u0 += w * std::pow(mc.u(x) - uv(q), 2);
    }
  }

  double e2_ujump = 0.0, e2_pjump = 0.0;  // (rho h)^-1 projected jumps
  double e2_pcheck_w = 0.0, e2_ucheck_w = 0.0;  // weighted edge-field norms
  Eigen::VectorXd t = eq.points.col(0);
  Eigen::MatrixXd phi_pc = sp.basis_pcheck.degree >= 0
                               ? sp.basis_pcheck.eval(t)
                               : Eigen::MatrixXd(eq.size(), 0);
  Eigen::MatrixXd phi_uc = sp.basis_ucheck.degree >= 0
                               ? sp.basis_ucheck.eval(t)
                               : Eigen::MatrixXd(eq.size(), 0);
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const EdgeInfo& ed = mesh.edges[e];
    // traces per side
    Eigen::VectorXd up, um, qnp, qnm;
    {
      Eigen::MatrixXd ref = edge_ref_points(mesh, ed.cell_plus, e, t);
      Eigen::VectorXd val, gx, gy, vx, vy, dv;
      sol.eval_u(ed.cell_plus, ref, val, gx, gy);
      sol.eval_p(ed.cell_plus, ref, vx, vy, dv);
      up = val;
      qnp = vx * ed.normal.x() + vy * ed.normal.y();
    }
    if (!ed.is_boundary()) {
      Eigen::MatrixXd ref = edge_ref_points(mesh, ed.cell_minus, e, t);
      Eigen::VectorXd val, gx, gy, vx, vy, dv;
      sol.eval_u(ed.cell_minus, ref, val, gx, gy);
      sol.eval_p(ed.cell_minus, ref, vx, vy, dv);
      um = val;
      qnm = vx * ed.normal.x() + vy * ed.normal.y();
    }
    // error jumps in the DG conventions; the exact solution contributes only
    // through the boundary data
    Eigen::VectorXd ujump = Eigen::VectorXd::Zero(eq.size());
    Eigen::VectorXd pjump = Eigen::VectorXd::Zero(eq.size());
    for (int q = 0; q < eq.size(); ++q) {
      Vec2 x = (1.0 - t(q)) * mesh.vertices[ed.v0] + t(q) * mesh.vertices[ed.v1];
      if (!ed.is_boundary()) {
        ujump(q) = um(q) - up(q);
        pjump(q) = qnm(q) - qnp(q);
      } else if (ed.tag == EdgeTag::Dirichlet) {
        ujump(q) = mc.u(x) - up(q);
      } else {
        pjump(q) = mc.p(x).dot(ed.normal) - qnp(q);
      }
    }
    // project onto the check bases (orthonormal: squared moments)
    if (sp.pcheck.offset[e] >= 0)
      for (int k = 0; k < sp.pcheck.count[e]; ++k) {
        double m = 0.0;
        for (int q = 0; q < eq.size(); ++q)
          m += eq.weights(q) * ed.h * ujump(q) * phi_pc(q, k) / std::sqrt(ed.h);
        e2_ujump += m * m / (rho * ed.h);
      }
    if (sp.ucheck.offset[e] >= 0)
      for (int k = 0; k < sp.ucheck.count[e]; ++k) {
        double m = 0.0;
        for (int q = 0; q < eq.size(); ++q)
          m += eq.weights(q) * ed.h * pjump(q) * phi_uc(q, k) / std::sqrt(ed.h);
        e2_pjump += m * m / (rho * ed.h);
      }
    // edge fields themselves (exact counterparts vanish)
    Eigen::VectorXd pc = sol.eval_pcheck(e, t);
    Eigen::VectorXd uc = sol.eval_ucheck(e, t);
    double last_pc = 0.0, last_uc = 0.0;
    for (int q = 0; q < eq.size(); ++q) {
      double w = eq.weights(q) * ed.h;
      last_pc += w * pc(q) * pc(q);
      last_uc += w * uc(q) * uc(q);
    }
    if (regime == PenaltyRegime::GradBased) {
      e2_pcheck_w += rho * ed.h * last_pc;
      e2_ucheck_w += last_uc / (rho * ed.h);
    } else {
      e2_pcheck_w += last_pc / (rho * ed.h);
      e2_ucheck_w += rho * ed.h * last_uc;
    }
  }

  std::array<double, 4> out{};
  if (regime == PenaltyRegime::GradBased) {
    out[0] = std::sqrt(e2_pc);
    out[1] = std::sqrt(e2_pcheck_w);
    out[2] = std::sqrt(e2_grad + e2_ujump);
    out[3] = std::sqrt(e2_ucheck_w);
  } else {
    out[0] = std::sqrt(e2_pc + e2_div + e2_pjump);
    out[1] = std::sqrt(e2_pcheck_w);
    out[2] = std::sqrt(e2_u0);
    out[3] = std::sqrt(e2_ucheck_w);
  }
  return out;
}

std::array<double, 4> solution_norms(const SolutionFields& sol,
                                     const ManufacturedCase& mc,
                                     const MethodConfig& config,
                                     PenaltyRegime regime) {
  return error_norms(sol, zeroed_copy(mc), config, regime);
}

Eigen::VectorXd interpolate_case(const Mesh2D& mesh, const Spaces& spaces,
                                 const ManufacturedCase& mc) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(spaces.total);
  int qd = std::min(form_quadrature_degree(spaces.config) + 4,
                    kMaxTriangleDegree);
  QuadRule cq = quad_triangle(qd);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    CellGeom geom = mesh.cell_geom(c);
    if (spaces.basis_u.dim > 0) {
      ScalarEval su = eval_mapped_scalar(spaces.basis_u, geom, cq.points);
      Eigen::VectorXd b = Eigen::VectorXd::Zero(spaces.basis_u.dim);
      Eigen::MatrixXd G = Eigen::MatrixXd::Zero(spaces.basis_u.dim,
                                                spaces.basis_u.dim);
      for (int q = 0; q < cq.size(); ++q) {
        Vec2 xq = geom.v0 + geom.B * Vec2(cq.points(q, 0), cq.points(q, 1));
        double w = cq.weights(q) * geom.det;
        b += w * mc.u(xq) * su.val.row(q).transpose();
        G += w * su.val.row(q).transpose() * su.val.row(q);
      }
      Eigen::VectorXd coef = G.ldlt().solve(b);
      for (int i = 0; i < spaces.basis_u.dim; ++i)
        x(spaces.global_u(c, i)) = coef(i);
    }
    if (spaces.basis_p.dim > 0) {
      VectorEval ev = eval_mapped_vector(spaces.basis_p, geom, cq.points);
      Eigen::VectorXd b = Eigen::VectorXd::Zero(spaces.basis_p.dim);
      Eigen::MatrixXd G = Eigen::MatrixXd::Zero(spaces.basis_p.dim,
                                                spaces.basis_p.dim);
      for (int q = 0; q < cq.size(); ++q) {
        Vec2 xq = geom.v0 + geom.B * Vec2(cq.points(q, 0), cq.points(q, 1));
        double w = cq.weights(q) * geom.det;
        Vec2 pe = mc.p(xq);
        for (int i = 0; i < spaces.basis_p.dim; ++i) {
          b(i) += w * (pe.x() * ev.vx(q, i) + pe.y() * ev.vy(q, i));
          for (int j = 0; j < spaces.basis_p.dim; ++j)
            G(i, j) += w * (ev.vx(q, i) * ev.vx(q, j) +
                            ev.vy(q, i) * ev.vy(q, j));
        }
      }
      Eigen::VectorXd coef = G.ldlt().solve(b);
      for (int i = 0; i < spaces.basis_p.dim; ++i)
        x(spaces.global_p(c, i)) = coef(i);
    }
  }
  return x;
}

ErrorReport eoc_study(const ManufacturedCase& mc, const MethodConfig& config,
                      const std::vector<int>& grid_sizes, AssemblyMode mode) {
  if (grid_sizes.size() < 2)
    throw std::invalid_argument("eoc_study: need at least 2 levels");
  ErrorReport rep;
  rep.regime = config.regime;
  rep.names = norm_names(config.regime);
  ProblemData data = mc.data();
  int level = 0;
  for (int n : grid_sizes) {
    Mesh2D mesh = build_structured_unit_square(n);
    Spaces sp = build_spaces(mesh, config);
    BlockSystem sys = assemble_system(mesh, sp, data, config, mode);
    SolveReport sr = solve_direct(sys.M, sys.rhs);
    if (!sr.ok)
      throw std::runtime_error("eoc_study: solver failed at n=" +
                               std::to_string(n) + ": " + sr.message);
    SolutionFields sol{&mesh, &sp, sr.x};
    ErrorRow row;
    row.level = level++;
    row.h = *std::max_element(mesh.cell_h.begin(), mesh.cell_h.end());
    row.dofs = sp.total;
    row.err = error_norms(sol, mc, config, config.regime);
    row.eoc.fill(std::numeric_limits<double>::quiet_NaN());
    if (!rep.rows.empty()) {
      const ErrorRow& prev = rep.rows.back();
      for (int i = 0; i < 4; ++i)
        if (prev.err[i] > 0 && row.err[i] > 0)
          row.eoc[i] =
              std::log(prev.err[i] / row.err[i]) / std::log(prev.h / row.h);
    }
    rep.rows.push_back(row);
  }
  return rep;
}

double dual_norm(const Eigen::VectorXd& F, const SpMat& N) {
  if (F.size() != N.rows())
    throw std::invalid_argument("dual_norm: dimension mismatch");
  if (F.norm() == 0.0) return 0.0;
  SpMat Nc = N;
  Nc.makeCompressed();
  Eigen::SimplicialLDLT<SpMat> llt(Nc);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("dual_norm: norm Gram not factorizable");
  double v = F.dot(llt.solve(F));
  if (v < 0)
    throw std::invalid_argument("dual_norm: norm Gram not positive definite");
  return std::sqrt(v);
}

LimitReport limit_study(const ManufacturedCase& mc, MethodConfig config,
                        const std::vector<double>& rhos, int grid_size,
                        LimitReference reference) {
  std::vector<std::string> violated =
      reference == LimitReference::Primal
          ? check_primal_limit_conditions(config)
          : check_mixed_limit_conditions(config);
  if (reference == LimitReference::Mixed &&
      (config.q_family != Family::BrokenRT || config.deg_p != 0))
    violated.push_back(
        "mixed limit reference is implemented for the RT^0 x P^0 pair only");
  ProblemData data = mc.data();
  // all-Dirichlet boundary: the mixed theorem's g_N = 0 holds trivially
  Mesh2D mesh = build_structured_unit_square(grid_size);
  // the theorems require homogeneous data on the retained boundary part
  {
    QuadRule eqc = quad_edge(10);
    double worst = 0.0;
    for (const EdgeInfo& ed : mesh.edges) {
      bool check = reference == LimitReference::Primal
                       ? ed.tag == EdgeTag::Dirichlet
                       : ed.tag == EdgeTag::Neumann;
      if (!check) continue;
      for (int q = 0; q < eqc.size(); ++q) {
        Vec2 x = (1.0 - eqc.points(q, 0)) * mesh.vertices[ed.v0] +
                 eqc.points(q, 0) * mesh.vertices[ed.v1];
        worst = std::max(worst, std::abs(reference == LimitReference::Primal
                                             ? data.g_dirichlet(x)
                                             : data.g_neumann(x)));
      }
    }
    if (worst > 1e-13)
      violated.push_back(reference == LimitReference::Primal
                             ? "primal limit requires g_D = 0"
                             : "mixed limit requires g_N = 0");
  }
  if (!violated.empty()) {
    std::string msg = "limit_study refused:";
    for (const std::string& v : violated) msg += "\n  " + v;
    throw std::invalid_argument(msg);
  }

  LimitReport rep;
  rep.reference = reference;
  int qd = std::min(form_quadrature_degree(config) + 4, kMaxTriangleDegree);
  QuadRule cq = quad_triangle(qd);
  QuadRule eq = quad_edge(std::min(qd, kMaxEdgeDegree));
  Eigen::VectorXd t = eq.points.col(0);

  ConformingPrimal primal;
  ConformingMixed mixed;
  if (reference == LimitReference::Primal)
    primal = conforming_primal_solve(mesh, data, config.deg_u);
  else
    mixed = conforming_mixed_solve(mesh, data);

  for (double rho : rhos) {
    config.rho = rho;
    Spaces sp = build_spaces(mesh, config);
    BlockSystem sys = assemble_system(mesh, sp, data, config);
    SolveReport sr = solve_direct(sys.M, sys.rhs);
    if (!sr.ok)
      throw std::runtime_error("limit_study: solver failed at rho=" +
                               std::to_string(rho) + ": " + sr.message);
    SolutionFields sol{&mesh, &sp, sr.x};
    double dist = 0.0;
    if (reference == LimitReference::Primal) {
      double e2_p = 0.0, e2_g = 0.0, e2_j = 0.0;
      for (int c = 0; c < mesh.n_cells(); ++c) {
        CellGeom geom = mesh.cell_geom(c);
        Eigen::VectorXd vx, vy, dv, uv, gx, gy, cu, cgx, cgy;
        sol.eval_p(c, cq.points, vx, vy, dv);
        sol.eval_u(c, cq.points, uv, gx, gy);
        primal.eval(c, cq.points, cu, cgx, cgy);
        for (int q = 0; q < cq.size(); ++q) {
          Vec2 x = geom.v0 + geom.B * Vec2(cq.points(q, 0), cq.points(q, 1));
          double w = cq.weights(q) * geom.det;
          // p^c = -alpha grad u^c (the flux equation solved pointwise)
          Vec2 pc = -(mc.alpha(x) * Vec2(cgx(q), cgy(q)));
          Vec2 dp = Vec2(vx(q), vy(q)) - pc;
          e2_p += w * dp.dot(mc.alpha(x).inverse() * dp);
          e2_g += w * (Vec2(gx(q), gy(q)) - Vec2(cgx(q), cgy(q))).squaredNorm();
        }
      }
      for (int e = 0; e < mesh.n_edges(); ++e) {
        const EdgeInfo& ed = mesh.edges[e];
        if (ed.tag == EdgeTag::Neumann) continue;  // [v]_e = 0 there
        Eigen::MatrixXd refp = edge_ref_points(mesh, ed.cell_plus, e, t);
        Eigen::VectorXd upv, d1, d2, cpv;
        sol.eval_u(ed.cell_plus, refp, upv, d1, d2);
        primal.eval(ed.cell_plus, refp, cpv, d1, d2);
        Eigen::VectorXd jump = upv - cpv;  // u^c is continuous
        if (!ed.is_boundary()) {
          Eigen::MatrixXd refm = edge_ref_points(mesh, ed.cell_minus, e, t);
          Eigen::VectorXd umv, cmv;
          sol.eval_u(ed.cell_minus, refm, umv, d1, d2);
          primal.eval(ed.cell_minus, refm, cmv, d1, d2);
          jump -= (umv - cmv);
        }
        for (int q = 0; q < eq.size(); ++q)
          e2_j += eq.weights(q) * ed.h * jump(q) * jump(q) / ed.h;
      }
      dist = std::sqrt(e2_p) + std::sqrt(e2_g + e2_j);
    } else {
      double e2_p = 0.0, e2_d = 0.0, e2_u = 0.0;
      for (int c = 0; c < mesh.n_cells(); ++c) {
        CellGeom geom = mesh.cell_geom(c);
        Eigen::VectorXd vx, vy, dv, uv, gx, gy, cx, cy, cd;
        sol.eval_p(c, cq.points, vx, vy, dv);
        sol.eval_u(c, cq.points, uv, gx, gy);
        mixed.eval_p(c, cq.points, cx, cy, cd);
        for (int q = 0; q < cq.size(); ++q) {
          Vec2 x = geom.v0 + geom.B * Vec2(cq.points(q, 0), cq.points(q, 1));
          double w = cq.weights(q) * geom.det;
          Vec2 dp = Vec2(vx(q), vy(q)) - Vec2(cx(q), cy(q));
          e2_p += w * dp.dot(mc.alpha(x).inverse() * dp);
          e2_d += w * std::pow(dv(q) - cd(q), 2);
          e2_u += w * std::pow(uv(q) - mixed.u(c), 2);
        }
      }
      dist = std::sqrt(e2_p) + std::sqrt(e2_d) + std::sqrt(e2_u);
    }
    rep.rows.push_back({rho, dist, sr.rel_residual});
  }

  // slope over points above the solver noise floor
  std::vector<double> lx, ly;
  for (const LimitRow& r : rep.rows)
    if (r.distance > 1e3 * r.solver_residual) {
      lx.push_back(std::log(r.rho));
      ly.push_back(std::log(r.distance));
    }
  rep.points_used = static_cast<int>(lx.size());
  if (rep.points_used >= 2) rep.slope = least_squares_slope(lx, ly);
  return rep;
}

std::vector<StabilityRow> stability_sweep(const ManufacturedCase& mc,
                                          MethodConfig config,
                                          const std::vector<double>& rhos,
                                          const std::vector<int>& grid_sizes) {
  if (config.regime == PenaltyRegime::Manual)
    throw std::invalid_argument("stability_sweep: no bound for manual regime");
  std::vector<StabilityRow> rows;
  ProblemData data = mc.data();
  ProblemData only_f = data, only_gd = data, only_gn = data;
  auto zero = [](const Vec2&) { return 0.0; };
  only_f.g_dirichlet = only_f.g_neumann = zero;
  only_gd.f = only_gd.g_neumann = zero;
  only_gn.f = only_gn.g_dirichlet = zero;
  for (int n : grid_sizes) {
    Mesh2D mesh = tag_boundary(build_structured_unit_square(n), [](const Vec2& x) {
      return x.x() > 1 - 1e-12 ? EdgeTag::Neumann : EdgeTag::Dirichlet;
    });
    for (double rho : rhos) {
      config.rho = rho;
      Spaces sp = build_spaces(mesh, config);
      BlockSystem sys = assemble_system(mesh, sp, data, config);
      SolveReport sr = solve_direct(sys.M, sys.rhs);
      if (!sr.ok)
        throw std::runtime_error("stability_sweep: solver failed: " +
                                 sr.message);
      SolutionFields sol{&mesh, &sp, sr.x};
      std::array<double, 4> nm = solution_norms(sol, mc, config, config.regime);
      double lhs = nm[0] + nm[1] + nm[2] + nm[3];

      NormMatrices grams = assemble_norm_grams(mesh, sp, config, config.regime,
                                               &data);
      const int npt = sp.dim_ptilde(), nut = sp.dim_utilde();
      SpMat Np = SpMat(grams.n_ptilde.topLeftCorner(npt, npt));
      SpMat Nu = SpMat(grams.n_utilde.bottomRightCorner(nut, nut));
      Eigen::VectorXd F_gd =
          assemble_rhs(mesh, sp, only_gd, config).head(npt);
      Eigen::VectorXd F_gn =
          assemble_rhs(mesh, sp, only_gn, config).tail(nut);
      double rhs;
      if (config.regime == PenaltyRegime::GradBased) {
        Eigen::VectorXd F_f = assemble_rhs(mesh, sp, only_f, config).tail(nut);
        rhs = dual_norm(F_f, Nu) + dual_norm(F_gd, Np) + dual_norm(F_gn, Nu);
      } else {
        QuadRule cq = quad_triangle(
            std::min(form_quadrature_degree(config) + 4, kMaxTriangleDegree));
        double f2 = 0.0;
        for (int c = 0; c < mesh.n_cells(); ++c) {
          CellGeom geom = mesh.cell_geom(c);
          for (int q = 0; q < cq.size(); ++q) {
            Vec2 x = geom.v0 + geom.B * Vec2(cq.points(q, 0), cq.points(q, 1));
            f2 += cq.weights(q) * geom.det * std::pow(data.f(x), 2);
          }
        }
        rhs = std::sqrt(f2) + dual_norm(F_gd, Np) + dual_norm(F_gn, Nu);
      }
      rows.push_back({rho, n, lhs, rhs, lhs / rhs});
    }
  }
  return rows;
}

void write_error_csv(const ErrorReport& report, std::ostream& os) {
  os << "level,h,dofs";
  for (const std::string& n : report.names) os << ",err_" << n;
  for (const std::string& n : report.names) os << ",eoc_" << n;
  os << "\n";
  os << std::setprecision(17);
  for (const ErrorRow& r : report.rows) {
    os << r.level << ',' << r.h << ',' << r.dofs;
    for (double e : r.err) os << ',' << e;
    for (double e : r.eoc) os << ',' << e;
    os << "\n";
  }
}

void write_error_markdown(const ErrorReport& report, std::ostream& os) {
  os << "| level | h | dofs |";
  for (const std::string& n : report.names) os << " err_" << n << " |";
  for (const std::string& n : report.names) os << " eoc_" << n << " |";
  os << "\n|";
  for (int i = 0; i < 11; ++i) os << "---|";
  os << "\n";
  os << std::setprecision(4);
  for (const ErrorRow& r : report.rows) {
    os << "| " << r.level << " | " << r.h << " | " << r.dofs << " |";
    for (double e : r.err) os << ' ' << e << " |";
    for (double e : r.eoc) os << ' ' << e << " |";
    os << "\n";
  }
}

}  // namespace xg
