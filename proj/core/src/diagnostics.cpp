#include "crypt_sim/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "crypt_sim/errors.hpp"

namespace crypt_sim {

namespace {

double source_budget(const SchemeConfig& cfg) {
  const double q = cfg.q_inf();
  const double m = cfg.m_inf();
  const double dt = cfg.dt();
  return 8.0 * dt * q * m * m * (1.0 + 2.0 * q * dt);
}

}  // namespace

EnergyCheck check_energy_total(const Field& rho_old, const Field& rho_new, const SchemeConfig& cfg) {
  EnergyCheck out;
  out.lhs = l2_norm_sq(rho_new) + 2.0 * cfg.eps() * cfg.dt() * gradient_norm_sq(rho_new);
  out.rhs = l2_norm_sq(rho_old) + source_budget(cfg);
  out.ok = out.lhs <= out.rhs * (1.0 + kEnergySlack);
  return out;
}

PartialEnergy check_energy_partial(Species /*i*/, const Field& rho_i_old, const Field& rho_i_new,
                                   const Field& rho_new, const SchemeConfig& cfg) {
  const double m = cfg.m_inf();
  PartialEnergy out;
  out.lhs = l2_norm_sq(rho_i_new) + cfg.eps() * cfg.dt() * gradient_norm_sq(rho_i_new);
  out.rhs = l2_norm_sq(rho_i_old) + cfg.dt() / cfg.eps() * m * m * gradient_norm_sq(rho_new) +
            source_budget(cfg);
  out.margin = out.rhs - out.lhs;
  return out;
}

EnergyCheck check_energy_concentration(const Field& cb_old, const Field& cb_new,
                                       const SchemeConfig& cfg) {
  const Parameters& p = cfg.params();
  const double m = cfg.m_inf();
  EnergyCheck out;
  out.lhs = l2_norm_sq(cb_new) + cfg.dt() * p.sigma_b * dirichlet_gradient_norm_sq(cb_new);
  out.rhs = l2_norm_sq(cb_old) + 2.0 * cfg.dt() / p.sigma_b * m * m * p.gamma * p.gamma;
  out.ok = out.lhs <= out.rhs * (1.0 + kEnergySlack);
  return out;
}

EnergyCheck poincare_check(const Field& c) {
  EnergyCheck out;
  out.lhs = l2_norm_sq(c);
  out.rhs = 0.5 * dirichlet_gradient_norm_sq(c);
  const double grid_slack = 10.0 / static_cast<double>(c.size());
  out.ok = out.lhs <= out.rhs * (1.0 + grid_slack);
  return out;
}

GradientBoundCheck gradient_bound_check(std::span<const State> snapshots, const SchemeConfig& cfg) {
  GradientBoundCheck out;
  if (snapshots.empty()) return out;
  const double q = cfg.q_inf();
  out.bound = q * q * cfg.t_end() * cfg.m_inf() + gradient_norm_sq(snapshots.front().total()) + 1e-6;
  for (const State& s : snapshots) {
    const double g = gradient_norm_sq(s.total());
    out.max_gradient_sq = std::max(out.max_gradient_sq, g);
    if (g > out.bound) out.ok = false;
  }
  return out;
}

std::array<Field, 4> weights(const State& state) {
  const Field rho = state.total();
  if (!(rho.min() > 0.0)) {
    throw InvariantViolation(fmt::format("weights need a positive total density, min is {:g}", rho.min()));
  }
  std::array<Field, 4> w{state.rho};
  for (auto& wi : w) {
    for (std::size_t j = 0; j < wi.size(); ++j) wi[j] /= rho[j];
  }
  return w;
}

std::array<double, 4> tv_weights(const State& state) {
  const auto w = weights(state);
  return {tv(w[0]), tv(w[1]), tv(w[2]), tv(w[3])};
}

double consistency_defect(const Field& rho_new, const std::array<Field, 4>& partials) {
  Field diff = rho_new;
  for (const Field& r : partials) diff -= r;
  return linf(diff);
}

double tv_gronwall_bound(double tv_w0_sum, double grad_rho_st_sq, double grad_cb_st_sq,
                         const Parameters& params, double t_end) {
  const double c = params.max_ramp_lipschitz();
  const double q = q_inf(params);
  const double k = c * t_end;
  const double l = std::sqrt(t_end) * (std::sqrt(grad_rho_st_sq) + std::sqrt(grad_cb_st_sq)) + k;
  return (tv_w0_sum + l) * (1.0 + c * q * t_end * std::exp(c * q * t_end));
}

}  // namespace crypt_sim
