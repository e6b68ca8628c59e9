#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "crypt_sim/grid.hpp"
#include "crypt_sim/state.hpp"

namespace crypt_sim {

/// Relative slack for the asserted energy inequalities.
inline constexpr double kEnergySlack = 1e-8;
/// Relative tolerance before a violation of the partial-density energy bound is reported.
inline constexpr double kPartialEnergyTolerance = 0.1;
inline constexpr double kMassTolerance = 1e-10;
inline constexpr double kBoundTolerance = 1e-10;
inline constexpr double kNegativityTolerance = 1e-12;

/// Per-step record of every discrete estimate.
struct StepReport {
  std::size_t step = 0;
  double t = 0.0;
  int picard_iters = 0;

  // total density from the Picard solve
  double min_rho = 0.0;
  double max_rho = 0.0;
  double min_partial = 0.0;
  double min_cb = 0.0;

  double energy_25_lhs = 0.0;
  double energy_25_rhs = 0.0;
  std::array<double, 4> energy_26_margin{};
  std::array<double, 4> energy_26_rhs{};
  double energy_27_lhs = 0.0;
  double energy_27_rhs = 0.0;

  std::array<double, 4> tv_w{};
  double grad_rho_l2_sq = 0.0;
  double grad_cb_l2_sq = 0.0;
  double consistency_defect = 0.0;
  double mass_residual = 0.0;
  double truncation_delta = 0.0;

  bool max_principle_ok = true;
  bool nonnegativity_ok = true;
  bool energy_25_ok = true;
  bool energy_26_ok = true;
  bool energy_27_ok = true;
  bool mass_ok = true;

  double tv_w_sum() const noexcept { return tv_w[0] + tv_w[1] + tv_w[2] + tv_w[3]; }
  /// Bounds that hold for the discrete scheme by construction.
  bool hard_ok() const noexcept {
    return max_principle_ok && nonnegativity_ok && energy_25_ok && energy_27_ok && mass_ok;
  }
};

struct EnergyCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = true;
};

/// ||rho_new||^2 + 2 eps dt ||d rho_new||^2
///   <= ||rho_old||^2 + 8 dt q_inf M^2 (1 + 2 q_inf dt)
EnergyCheck check_energy_total(const Field& rho_old, const Field& rho_new, const SchemeConfig& cfg);

struct PartialEnergy {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
};

/// ||rho_i_new||^2 + eps dt ||d rho_i_new||^2 against
///   ||rho_i_old||^2 + (dt / eps) M^2 ||d rho_new||^2 + 8 q_inf dt M^2 (1 + 2 q_inf dt).
/// Monitored only: upwinding changes the constant.
PartialEnergy check_energy_partial(Species i, const Field& rho_i_old, const Field& rho_i_new,
                                   const Field& rho_new, const SchemeConfig& cfg);

/// ||c_new||^2 + dt sigma_b ||d c_new||^2 <= ||c_old||^2 + 2 (dt / sigma_b) M^2 gamma^2,
/// gradient taken with the Dirichlet half cell at x = 1.
EnergyCheck check_energy_concentration(const Field& cb_old, const Field& cb_new,
                                       const SchemeConfig& cfg);

/// ||c||^2 <= 1/2 ||d c||^2 for c vanishing at x = 1, with slack 10 / N.
EnergyCheck poincare_check(const Field& c);

struct GradientBoundCheck {
  bool ok = true;
  double bound = 0.0;
  double max_gradient_sq = 0.0;
};

/// Every snapshot satisfies ||d rho(t)||^2 <= q_inf^2 T M + ||d rho(0)||^2 + 1e-6,
/// where snapshots.front() is the regularized initial state.
GradientBoundCheck gradient_bound_check(std::span<const State> snapshots, const SchemeConfig& cfg);

/// rho_i / rho with rho the sum of the partial densities. Throws
/// InvariantViolation where rho is not positive.
std::array<Field, 4> weights(const State& state);

std::array<double, 4> tv_weights(const State& state);

/// linf(rho_new - sum of partials)
double consistency_defect(const Field& rho_new, const std::array<Field, 4>& partials);

/// Reference value of the Gronwall-type bound on sum_i TV(w_i):
///   (TV(w^0) + L)(1 + C q T exp(C q T)),  L = sqrt(T)(|d rho|_{L2} + |d c|_{L2}) + K,
/// with C the largest ramp Lipschitz constant and K = C T. Space-time norms
/// are passed in squared.
double tv_gronwall_bound(double tv_w0_sum, double grad_rho_st_sq, double grad_cb_st_sq,
                         const Parameters& params, double t_end);

}  // namespace crypt_sim
