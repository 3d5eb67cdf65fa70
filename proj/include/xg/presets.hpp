#pragma once

#include <string>
#include <vector>

#include "xg/problem.hpp"

namespace xg {

/// A named method from the literature expressed as a 4-field configuration,
/// together with the stability regime it is known to satisfy.
struct Preset {
  std::string name;
  std::string label;  // "gradient-based", "divergence-based" or "not proved"
  MethodConfig config;
};

/// The named methods, in table order.
const std::vector<std::string>& preset_names();

/// Builds a named method of order k. Besides the table rows, three study
/// shorthands are accepted: grad-k (Q^k, Qc^k, V^{k+1}, Vc^k, gradient
/// regime), div-rt (RT^k, Qc^k, V^k, Vc^k) and div-k (P^{k+1} flux,
/// Vc^{k+1} so the flux traces stay controlled).
Preset make_preset(const std::string& name, int k);

/// Accepts "name" or "name<digits>" (e.g. "grad-k0" = grad-k with k=0).
Preset parse_preset(const std::string& text, int default_k);

/// Numerically verified inf-sup theorem conditions for the config's regime:
/// gradient regime (a) constants in Qcheck_h, (b) grad_h V_h in Q_h,
/// (c) {grad_h V_h}_e in Qcheck_h; divergence regime (a) stable conforming
/// pair, (b) div_h Q_h = V_h, (c) {div_h Q_h} in Vcheck_h. Inclusions are
/// measured by projection residuals on a coarse mesh. Returns the violated
/// conditions, empty when all hold.
std::vector<std::string> check_conditions(const MethodConfig& config);

/// Conditions of the rho -> 0 limit theorems (boundary data requirements are
/// checked by the limit study itself).
std::vector<std::string> check_primal_limit_conditions(
    const MethodConfig& config);
std::vector<std::string> check_mixed_limit_conditions(
    const MethodConfig& config);

}  // namespace xg
