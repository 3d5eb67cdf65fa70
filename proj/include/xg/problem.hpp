#pragma once

#include <functional>
#include <stdexcept>

#include "xg/mesh.hpp"

namespace xg {

/// Penalty scaling regime. GradBased: tau = (rho h_e)^-1, eta = c_eta rho h_e.
/// DivBased: eta = (rho h_e)^-1, tau = c_tau rho h_e.
enum class PenaltyRegime { GradBased, DivBased, Manual };

/// Space degrees, penalty regime and elimination mode for one method.
/// A degree of -1 requests the trivial space {0}.
struct MethodConfig {
  int deg_p = 0;             // Q_h
  int deg_pcheck = 0;        // Qcheck_h
  int deg_u = 1;             // V_h
  int deg_ucheck = 0;        // Vcheck_h
  Family q_family = Family::VectorPk;
  PenaltyRegime regime = PenaltyRegime::GradBased;
  double rho = 1.0;
  double c_eta = 1.0;
  double c_tau = 1.0;
  std::function<double(const EdgeInfo&)> manual_tau, manual_eta;

  double tau(const EdgeInfo& e) const {
    switch (regime) {
      case PenaltyRegime::GradBased: return 1.0 / (rho * e.h);
      case PenaltyRegime::DivBased: return c_tau * rho * e.h;
      case PenaltyRegime::Manual: return manual_tau(e);
    }
    throw std::logic_error("unreachable");
  }
  double eta(const EdgeInfo& e) const {
    switch (regime) {
      case PenaltyRegime::GradBased: return c_eta * rho * e.h;
      case PenaltyRegime::DivBased: return 1.0 / (rho * e.h);
      case PenaltyRegime::Manual: return manual_eta(e);
    }
    throw std::logic_error("unreachable");
  }
};

/// Coefficient, source and boundary data of the elliptic problem.
struct ProblemData {
  std::function<Mat2(const Vec2&)> alpha;  // SPD
  std::function<double(const Vec2&)> f;
  std::function<double(const Vec2&)> g_dirichlet;
  std::function<double(const Vec2&)> g_neumann;

  Mat2 c_inv(const Vec2& x) const { return alpha(x).inverse(); }
};

/// Zero data with identity coefficient.
ProblemData zero_data();

}  // namespace xg
