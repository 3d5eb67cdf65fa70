#pragma once

#include <array>
#include <limits>

#include "xg/assembly.hpp"
#include "xg/conforming.hpp"

namespace xg {

/// Exact solution with analytically supplied derivatives; the flux is
/// p = -alpha grad u and the load is f = div p. data() packages the
/// boundary traces, with the Neumann datum taken as p.n against the unit
/// square's outward normal.
struct ManufacturedCase {
  std::string id;
  int exact_degree = -1;  // polynomial degree of u when exact, else -1
  std::function<double(const Vec2&)> u;
  std::function<Vec2(const Vec2&)> grad_u;
  std::function<Mat2(const Vec2&)> alpha;
  std::function<Vec2(const Vec2&)> p;
  std::function<double(const Vec2&)> f;

  ProblemData data() const;
};

const std::vector<ManufacturedCase>& builtin_cases();
const ManufacturedCase& find_case(const std::string& id);

/// Outward unit normal of the unit square at a boundary point.
Vec2 unit_square_normal(const Vec2& x);

/// Column labels of the regime's error quartet.
std::array<std::string, 4> norm_names(PenaltyRegime regime);

/// Regime error quartet. Gradient regime: |p-p_h|_{0,c}, |pcheck|_{0,rh},
/// |u-u_h|_{1,rh} (broken H1 plus projected-jump penalty), |ucheck|_{0,1/rh}.
/// Divergence regime: |p-p_h|_{div,rh}, |pcheck|_{0,1/rh}, |u-u_h|_0,
/// |ucheck|_{0,rh}. The exact edge fields are zero.
std::array<double, 4> error_norms(const SolutionFields& sol,
                                  const ManufacturedCase& mc,
                                  const MethodConfig& config,
                                  PenaltyRegime regime);

/// The same quartet measured on the discrete fields themselves.
std::array<double, 4> solution_norms(const SolutionFields& sol,
                                     const ManufacturedCase& mc,
                                     const MethodConfig& config,
                                     PenaltyRegime regime);

/// Cellwise L2 projections of the exact (p, u); edge fields zero, which is
/// the consistent extension of a smooth solution.
Eigen::VectorXd interpolate_case(const Mesh2D& mesh, const Spaces& spaces,
                                 const ManufacturedCase& mc);

struct ErrorRow {
  int level = 0;
  double h = 0.0;
  int dofs = 0;
  std::array<double, 4> err{};
  std::array<double, 4> eoc{};  // NaN on the first level
};

struct ErrorReport {
  PenaltyRegime regime = PenaltyRegime::GradBased;
  std::array<std::string, 4> names;
  std::vector<ErrorRow> rows;
};

/// Solves on structured n x n meshes (pure Dirichlet boundary) and tabulates
/// errors with EOC = log2(e_l / e_{l+1}) between consecutive levels.
ErrorReport eoc_study(const ManufacturedCase& mc, const MethodConfig& config,
                      const std::vector<int>& grid_sizes,
                      AssemblyMode mode = AssemblyMode::Parallel);

enum class LimitReference { Primal, Mixed };

struct LimitRow {
  double rho = 0.0;
  double distance = 0.0;
  double solver_residual = 0.0;
};

struct LimitReport {
  LimitReference reference = LimitReference::Primal;
  std::vector<LimitRow> rows;
  double slope = std::numeric_limits<double>::quiet_NaN();
  int points_used = 0;
};

/// Distance of the 4-field solution to the conforming reference as rho
/// shrinks. Primal: |p - p^c|_{0,c} plus the broken-H1-with-jumps distance
/// of u, against the Lagrange solution (requires g_D = 0 and the primal
/// limit conditions). Mixed: |p - p^c|_{0,c} + |div(p - p^c)|_0 +
/// |u - u^c|_0 against RT0 x P0 (requires g_N = 0). The slope is a least
/// squares log-log fit over points above 1e3 x the solver residual floor.
/// Refuses (std::invalid_argument) when a theorem condition is violated.
LimitReport limit_study(const ManufacturedCase& mc, MethodConfig config,
                        const std::vector<double>& rhos, int grid_size,
                        LimitReference reference);

/// sqrt(F^T N^{-1} F): the exact discrete sup of F over the norm ball of N.
double dual_norm(const Eigen::VectorXd& F, const SpMat& N);

struct StabilityRow {
  double rho = 0.0;
  int n = 0;
  double lhs = 0.0;    // sum of the four solution norms
  double rhs = 0.0;    // dual norms of the data
  double ratio = 0.0;  // lhs / rhs
};

/// Measures the stability constant of the regime's a-priori bound across a
/// (rho, mesh) sweep. Gradient regime data norms: |f|_{-1,rh} +
/// |g_D|_{1/2,rh} + |g_N|_{-1/2,rh}; divergence regime: |f|_0 +
/// |g_D|_{-1/2,rh} + |g_N|_{1/2,rh}; the g-duals are computed from the
/// boundary functionals of the assembled right-hand side and summed.
std::vector<StabilityRow> stability_sweep(const ManufacturedCase& mc,
                                          MethodConfig config,
                                          const std::vector<double>& rhos,
                                          const std::vector<int>& grid_sizes);

/// CSV columns: level,h,dofs,err_<n1>..,eoc_<n1>.. with 17 significant
/// digits; deterministic for identical inputs.
void write_error_csv(const ErrorReport& report, std::ostream& os);
void write_error_markdown(const ErrorReport& report, std::ostream& os);

}  // namespace xg
