#include <doctest.h>

#include "xg/eliminate.hpp"
#include "xg/linalg.hpp"

using namespace xg;

namespace {

Mesh2D mixed_mesh(int n) {
  return tag_boundary(build_structured_unit_square(n), [](const Vec2& x) {
    return x.x() > 1 - 1e-12 ? EdgeTag::Neumann : EdgeTag::Dirichlet;
  });
}

ProblemData smooth_data() {
  ProblemData d = zero_data();
  d.f = [](const Vec2& x) { return 1.0 + x.x() * x.y(); };
  d.g_dirichlet = [](const Vec2& x) { return x.x() - x.y(); };
  d.g_neumann = [](const Vec2& x) { return std::sin(x.y()); };
  return d;
}

BlockSystem make_system(const Mesh2D& m, const MethodConfig& cfg) {
  Spaces sp = build_spaces(m, cfg);
  return assemble_system(m, sp, smooth_data(), cfg);
}

// compare the physically meaningful (p, u) components of two full vectors
double pu_distance(const Spaces& sp, const Eigen::VectorXd& a,
                   const Eigen::VectorXd& b) {
  double n2 = 0.0;
  n2 += (a.segment(sp.off_p, sp.p.total) - b.segment(sp.off_p, sp.p.total))
            .squaredNorm();
  n2 += (a.segment(sp.off_u, sp.u.total) - b.segment(sp.off_u, sp.u.total))
            .squaredNorm();
  return std::sqrt(n2);
}

double max_abs(const SpMat& m) {
  double s = 0.0;
  for (int c = 0; c < m.outerSize(); ++c)
    for (SpMat::InnerIterator it(m, c); it; ++it)
      s = std::max(s, std::abs(it.value()));
  return s;
}

}  // namespace

TEST_CASE("trivial spaces give identity transforms") {
  Mesh2D m = mixed_mesh(1);
  MethodConfig cfg;
  cfg.deg_p = 0;
  cfg.deg_u = 0;
  cfg.deg_pcheck = -1;
  cfg.deg_ucheck = -1;
  BlockSystem sys = make_system(m, cfg);
  ReducedSystem r = eliminate_pcheck(m, sys);
  CHECK(r.M.rows() == sys.M.rows());
  CHECK(max_abs(SpMat(r.M - sys.M)) == 0.0);
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(sys.M.rows(), 0, 1);
  CHECK(r.reconstruct(x) == x);
  CHECK(eliminate_both(m, sys).M.rows() == sys.M.rows());
}

TEST_CASE("every elimination path reproduces the 4-field solution") {
  for (int n : {1, 2}) {
    Mesh2D m = mixed_mesh(n);
    for (int k : {0, 1}) {
      MethodConfig cfg;
      cfg.deg_p = k;
      cfg.deg_u = k + 1;
      cfg.deg_pcheck = k + 1;
      cfg.deg_ucheck = k;
      BlockSystem sys = make_system(m, cfg);
      SolveReport full = solve_direct(sys.M, sys.rhs);
      REQUIRE(full.ok);
      for (auto* fn : {&eliminate_pcheck, &eliminate_ucheck, &eliminate_both}) {
        ReducedSystem red = (*fn)(m, sys);
        SolveReport rs = solve_direct(red.M, red.rhs);
        REQUIRE(rs.ok);
        Eigen::VectorXd rec = red.reconstruct(rs.x);
        CHECK(pu_distance(sys.spaces, rec, full.x) /
                  std::max(full.x.norm(), 1.0) <
              1e-10);
        // the reconstructed full vector solves the original system
        CHECK((sys.M * rec - sys.rhs).norm() /
                  std::max(sys.rhs.norm(), 1.0) <
              1e-9);
      }
    }
  }
}

TEST_CASE("elimination order commutes") {
  Mesh2D m = mixed_mesh(2);
  MethodConfig cfg;
  cfg.deg_p = 1;
  cfg.deg_u = 1;
  cfg.deg_pcheck = 1;
  cfg.deg_ucheck = 1;
  BlockSystem sys = make_system(m, cfg);
  const Spaces& sp = sys.spaces;
  ReducedSystem first = eliminate_pcheck(m, sys);
  // in the 3-field layout (p, u, ucheck) the ucheck indices are trailing
  std::vector<int> uc(sp.ucheck.total);
  for (int i = 0; i < sp.ucheck.total; ++i)
    uc[i] = sp.p.total + sp.u.total + i;
  ReducedSystem second = schur_eliminate(first.M, first.rhs, uc, "step2");
  ReducedSystem both = eliminate_both(m, sys);
  REQUIRE(second.M.rows() == both.M.rows());
  CHECK(max_abs(SpMat(second.M - both.M)) <= 1e-12 * max_abs(both.M));
  CHECK((second.rhs - both.rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("reconstructed pcheck is the scaled projected jump of u") {
  Mesh2D m = mixed_mesh(2);
  MethodConfig cfg;
  cfg.deg_p = 1;
  cfg.deg_u = 1;
  cfg.deg_pcheck = 1;
  cfg.deg_ucheck = 1;
  Spaces sp = build_spaces(m, cfg);
  ProblemData d = smooth_data();
  d.g_dirichlet = [](const Vec2&) { return 0.0; };  // homogeneous
  BlockSystem sys = assemble_system(m, sp, d, cfg);
  ReducedSystem red = eliminate_pcheck(m, sys);
  SolveReport rs = solve_direct(red.M, red.rhs);
  REQUIRE(rs.ok);
  Eigen::VectorXd full = red.reconstruct(rs.x);
  SpMat T = jump_moment_matrix(m, sp, FieldKind::Pcheck);
  Eigen::VectorXd jumps = T * full.segment(sp.off_u, sp.u.total);
  for (int e = 0; e < m.n_edges(); ++e)
    for (int k = 0; k < sp.pcheck.count[e]; ++k) {
      int loc = sp.pcheck.offset[e] + k;
      CHECK(full(sp.off_pcheck + loc) ==
            doctest::Approx(cfg.tau(m.edges[e]) * jumps(loc)).epsilon(1e-9));
    }
}

TEST_CASE("eliminate_both matches the directly assembled DG operator") {
  Mesh2D m = mixed_mesh(2);
  for (auto [kpc, kuc] : {std::pair{1, 1}, {1, -1}, {-1, 1}}) {
    MethodConfig cfg;
    cfg.deg_p = 1;
    cfg.deg_u = 1;
    cfg.deg_pcheck = kpc;
    cfg.deg_ucheck = kuc;
    Spaces sp = build_spaces(m, cfg);
    BlockSystem sys = assemble_system(m, sp, smooth_data(), cfg);
    ReducedSystem red = eliminate_both(m, sys);
    const int np = sp.p.total, nu = sp.u.total;
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(np + nu, np + nu);
    Eigen::MatrixXd Md = Eigen::MatrixXd(sys.M);
    expected.topLeftCorner(np, np) = Md.block(sp.off_p, sp.off_p, np, np);
    expected.topRightCorner(np, nu) = Md.block(sp.off_p, sp.off_u, np, nu);
    expected.bottomLeftCorner(nu, np) = Md.block(sp.off_u, sp.off_p, nu, np);
    // + <eta Qcheck^u [p], Qcheck^u [q]> on the p block
    if (kuc >= 0) {
      SpMat Tu = jump_moment_matrix(m, sp, FieldKind::Ucheck);
      Eigen::VectorXd eta(sp.ucheck.total);
      for (int e = 0; e < m.n_edges(); ++e)
        for (int k = 0; k < sp.ucheck.count[e]; ++k)
          eta(sp.ucheck.offset[e] + k) = cfg.eta(m.edges[e]);
      expected.topLeftCorner(np, np) +=
          Eigen::MatrixXd(SpMat(Tu.transpose() * eta.asDiagonal() * Tu));
    }
    // - <tau Qcheck^p [u], Qcheck^p [v]> on the u block (the -C position)
    if (kpc >= 0) {
      SpMat Tp = jump_moment_matrix(m, sp, FieldKind::Pcheck);
      Eigen::VectorXd tau(sp.pcheck.total);
      for (int e = 0; e < m.n_edges(); ++e)
        for (int k = 0; k < sp.pcheck.count[e]; ++k)
          tau(sp.pcheck.offset[e] + k) = cfg.tau(m.edges[e]);
      expected.bottomRightCorner(nu, nu) -=
          Eigen::MatrixXd(SpMat(Tp.transpose() * tau.asDiagonal() * Tp));
    }
    Eigen::MatrixXd got = Eigen::MatrixXd(red.M);
    CHECK((got - expected).cwiseAbs().maxCoeff() <=
          1e-12 * expected.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("hybridization reproduces the 4-field solution") {
  for (int n : {1, 2}) {
    Mesh2D m = mixed_mesh(n);
    for (int k : {0, 1}) {
      MethodConfig cfg;
      cfg.deg_p = k;
      cfg.deg_u = k;
      cfg.deg_pcheck = k;
      cfg.deg_ucheck = k;
      cfg.regime = PenaltyRegime::GradBased;
      cfg.c_eta = 0.25;
      BlockSystem sys = make_system(m, cfg);
      SolveReport full = solve_direct(sys.M, sys.rhs);
      REQUIRE(full.ok);
      ReducedSystem hyb = hybridize_uhat(m, sys);
      CHECK(hyb.M.rows() == sys.spaces.ucheck.total);
      SolveReport hs = solve_direct(hyb.M, hyb.rhs);
      REQUIRE(hs.ok);
      Eigen::VectorXd rec = hyb.reconstruct(hs.x);
      CHECK(pu_distance(sys.spaces, rec, full.x) /
                std::max(full.x.norm(), 1.0) <
            1e-9);
      // Schur complement is symmetric definite
      Eigen::MatrixXd S = Eigen::MatrixXd(hyb.M);
      CHECK((S - S.transpose()).cwiseAbs().maxCoeff() <=
            1e-12 * S.cwiseAbs().maxCoeff());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
      CHECK(es.eigenvalues().cwiseAbs().minCoeff() > 0.0);
      bool pos = es.eigenvalues().minCoeff() > 0.0;
      bool neg = es.eigenvalues().maxCoeff() < 0.0;
      CHECK((pos || neg));
    }
  }
}

TEST_CASE("hybridization on one cell: Schur lives on Neumann edges only") {
  Mesh2D m = tag_boundary(build_single_triangle(), [](const Vec2& x) {
    return x.y() < 1e-12 ? EdgeTag::Neumann : EdgeTag::Dirichlet;
  });
  MethodConfig cfg;
  cfg.deg_p = 0;
  cfg.deg_u = 0;
  cfg.deg_pcheck = 0;
  cfg.deg_ucheck = 0;
  cfg.c_eta = 0.25;
  BlockSystem sys = make_system(m, cfg);
  ReducedSystem hyb = hybridize_uhat(m, sys);
  CHECK(hyb.M.rows() == 1);  // one Neumann edge, degree 0
  SolveReport full = solve_direct(sys.M, sys.rhs);
  SolveReport hs = solve_direct(hyb.M, hyb.rhs);
  REQUIRE(full.ok);
  REQUIRE(hs.ok);
  CHECK(pu_distance(sys.spaces, hyb.reconstruct(hs.x), full.x) < 1e-9);
}

TEST_CASE("hybridization refusals name the violated requirement") {
  Mesh2D m = mixed_mesh(1);
  // traces of V_h (degree 1) not contained in Vcheck (degree 0)
  MethodConfig bad;
  bad.deg_p = 0;
  bad.deg_u = 1;
  bad.deg_pcheck = 0;
  bad.deg_ucheck = 0;
  bad.c_eta = 0.25;
  BlockSystem sys = make_system(m, bad);
  CHECK_THROWS_WITH_AS(hybridize_uhat(m, sys),
                       doctest::Contains("V_h"), std::invalid_argument);
  // penalty relation eta = tau^{-1}/4 violated
  MethodConfig wrong;
  wrong.deg_p = 0;
  wrong.deg_u = 0;
  wrong.deg_pcheck = 0;
  wrong.deg_ucheck = 0;
  wrong.c_eta = 1.0;
  BlockSystem sys2 = make_system(m, wrong);
  CHECK_THROWS_WITH_AS(hybridize_uhat(m, sys2),
                       doctest::Contains("tau"), std::invalid_argument);
}

TEST_CASE("wg phat transform: equivalence and reconstruction identity") {
  Mesh2D m = mixed_mesh(2);
  for (auto fam : {Family::BrokenRT, Family::VectorPk}) {
    MethodConfig cfg;
    cfg.q_family = fam;
    cfg.deg_p = fam == Family::BrokenRT ? 0 : 1;
    cfg.deg_u = 0;
    cfg.deg_pcheck = fam == Family::BrokenRT ? 0 : 1;
    cfg.deg_ucheck = 0;
    cfg.regime = PenaltyRegime::DivBased;
    cfg.c_tau = 0.25;
    BlockSystem sys = make_system(m, cfg);
    SolveReport full = solve_direct(sys.M, sys.rhs);
    REQUIRE(full.ok);
    ReducedSystem wg = assemble_wg_phat(m, sys);
    SolveReport ws = solve_direct(wg.M, wg.rhs);
    REQUIRE(ws.ok);
    Eigen::VectorXd rec = wg.reconstruct(ws.x);
    CHECK(pu_distance(sys.spaces, rec, full.x) /
              std::max(full.x.norm(), 1.0) <
          1e-10);
    // phat = Qcheck^p {p}_e + pcheck: the reduced unknowns in the pcheck
    // slots equal the reconstructed pcheck plus the projected average
    const Spaces& sp = sys.spaces;
    SpMat T = avg_moment_matrix(m, sp, FieldKind::Pcheck);
    Eigen::VectorXd phat = ws.x.segment(sp.p.total, sp.pcheck.total);
    Eigen::VectorXd expect =
        T * rec.segment(sp.off_p, sp.p.total) +
        rec.segment(sp.off_pcheck, sp.pcheck.total);
    CHECK((phat - expect).cwiseAbs().maxCoeff() < 1e-12 *
          std::max(1.0, phat.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("wg phat refusal on a flux trace violation") {
  Mesh2D m = mixed_mesh(1);
  MethodConfig bad;
  bad.deg_p = 1;       // normal traces of degree 1
  bad.deg_pcheck = 0;  // cannot hold them
  bad.deg_u = 0;
  bad.deg_ucheck = 0;
  bad.regime = PenaltyRegime::DivBased;
  bad.c_tau = 0.25;
  BlockSystem sys = make_system(m, bad);
  CHECK_THROWS_AS(assemble_wg_phat(m, sys), std::invalid_argument);
}
