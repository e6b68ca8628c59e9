#include "crypt_sim/model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "crypt_sim/errors.hpp"

namespace crypt_sim {

bool RampSpec::valid() const noexcept {
  return std::isfinite(K) && std::isfinite(kappa) && kappa > 0.0 && K - kappa > 0.0;
}

double ramp_eval(const RampSpec& spec, double y) noexcept {
  if (y <= spec.K - spec.kappa) return 0.0;
  if (y >= spec.K + spec.kappa) return 1.0;
  // The cubic written in the shifted variable z = (y - K) / kappa:
  //   -y^3/(4k^3) + 3Ky^2/(4k^3) - (3K^2 - 3k^2)y/(4k^3) + (K^3 + 2k^3 - 3Kk^2)/(4k^3)
  //   = (2 + 3z - z^3) / 4
  // which avoids cancellation between the O(K^3/k^3) coefficients.
  const double z = (y - spec.K) / spec.kappa;
  return 0.25 * (2.0 + z * (3.0 - z * z));
}

double ramp_derivative(const RampSpec& spec, double y) noexcept {
  if (y <= spec.K - spec.kappa || y >= spec.K + spec.kappa) return 0.0;
  const double z = (y - spec.K) / spec.kappa;
  return 0.75 * (1.0 - z * z) / spec.kappa;
}

double ramp_lipschitz(const RampSpec& spec) noexcept { return 0.75 / spec.kappa; }

namespace {

const std::array<RateField, 10> kScalarFields{{
    {"q_div_s", &Parameters::q_div_s},
    {"q_s_p", &Parameters::q_s_p},
    {"q_div_p", &Parameters::q_div_p},
    {"q_p_e", &Parameters::q_p_e},
    {"q_p_g", &Parameters::q_p_g},
    {"q_ex_e", &Parameters::q_ex_e},
    {"q_ex_g", &Parameters::q_ex_g},
    {"sigma_b", &Parameters::sigma_b},
    {"gamma", &Parameters::gamma},
    {"c_b_d", &Parameters::c_b_d},
}};

const std::array<RampField, 14> kRampFields{{
    {"R_div_s", &Parameters::R_div_s},
    {"R_s_p", &Parameters::R_s_p},
    {"R_div_p", &Parameters::R_div_p},
    {"R_p_e", &Parameters::R_p_e},
    {"R_p_g", &Parameters::R_p_g},
    {"R_ex_e", &Parameters::R_ex_e},
    {"R_ex_g", &Parameters::R_ex_g},
    {"Rbar_div_s", &Parameters::Rbar_div_s},
    {"Rbar_div_p", &Parameters::Rbar_div_p},
    {"Rbar_ex_e", &Parameters::Rbar_ex_e},
    {"Rbar_ex_g", &Parameters::Rbar_ex_g},
    {"Runder_div_s", &Parameters::Runder_div_s},
    {"Runder_p_e", &Parameters::Runder_p_e},
    {"Runder_p_g", &Parameters::Runder_p_g},
}};

}  // namespace

const std::array<RateField, 10>& scalar_parameter_fields() { return kScalarFields; }
const std::array<RampField, 14>& ramp_parameter_fields() { return kRampFields; }

void Parameters::validate() const {
  for (const auto& f : kScalarFields) {
    const double v = this->*f.member;
    if (!std::isfinite(v)) throw ValidationError(fmt::format("{} = {} is not finite", f.name, v));
  }
  for (std::size_t i = 0; i < 7; ++i) {
    const auto& f = kScalarFields[i];
    if (this->*f.member < 0.0) {
      throw ValidationError(fmt::format("{} = {} must be >= 0", f.name, this->*f.member));
    }
  }
  if (!(sigma_b > 0.0)) throw ValidationError(fmt::format("sigma_b = {} must be > 0", sigma_b));
  if (!(gamma >= 0.0)) throw ValidationError(fmt::format("gamma = {} must be >= 0", gamma));
  if (!(c_b_d > 0.0)) throw ValidationError(fmt::format("c_b_d = {} must be > 0", c_b_d));
  for (const auto& f : kRampFields) {
    const RampSpec& r = this->*f.member;
    if (!r.valid()) {
      throw ValidationError(fmt::format("ramp {} (K = {}, kappa = {}) needs kappa > 0 and K - kappa > 0",
                                        f.name, r.K, r.kappa));
    }
  }
}

double Parameters::density_plateau() const noexcept {
  return std::max({Rbar_div_s.K + Rbar_div_s.kappa, Rbar_div_p.K + Rbar_div_p.kappa,
                   Rbar_ex_e.K + Rbar_ex_e.kappa, Rbar_ex_g.K + Rbar_ex_g.kappa});
}

double Parameters::max_ramp_lipschitz() const noexcept {
  double c = 0.0;
  for (const auto& f : kRampFields) c = std::max(c, ramp_lipschitz(this->*f.member));
  return c;
}

SourceTerms source_terms(double x, double rho, double rho_s, double rho_p, double rho_e,
                         double rho_g, double c_b, const Parameters& p) noexcept {
  const double div_s = p.q_div_s * (1.0 - ramp_eval(p.R_div_s, x)) *
                       (1.0 - ramp_eval(p.Rbar_div_s, rho)) *
                       (1.0 - ramp_eval(p.Runder_div_s, c_b));
  const double s_to_p = p.q_s_p * ramp_eval(p.R_s_p, x);
  const double div_p =
      p.q_div_p * (1.0 - ramp_eval(p.R_div_p, x)) * (1.0 - ramp_eval(p.Rbar_div_p, rho));
  const double p_to_e = p.q_p_e * ramp_eval(p.R_p_e, x) * ramp_eval(p.Runder_p_e, c_b);
  const double p_to_g = p.q_p_g * ramp_eval(p.R_p_g, x) * ramp_eval(p.Runder_p_g, c_b);
  const double ex_e = p.q_ex_e * ramp_eval(p.R_ex_e, x) * ramp_eval(p.Rbar_ex_e, rho);
  const double ex_g = p.q_ex_g * ramp_eval(p.R_ex_g, x) * ramp_eval(p.Rbar_ex_g, rho);

  SourceTerms f;
  f.s = rho_s * div_s - rho_s * s_to_p;
  f.p = rho_p * div_p - rho_p * p_to_e - rho_p * p_to_g + rho_s * s_to_p;
  f.e = rho_p * p_to_e - rho_e * ex_e;
  f.g = rho_p * p_to_g - rho_g * ex_g;
  return f;
}

double total_source(double x, double rho, double rho_s, double rho_p, double rho_e,
                    double rho_g, double c_b, const Parameters& p) noexcept {
  return rho_s * p.q_div_s * (1.0 - ramp_eval(p.R_div_s, x)) *
             (1.0 - ramp_eval(p.Rbar_div_s, rho)) * (1.0 - ramp_eval(p.Runder_div_s, c_b)) +
         rho_p * p.q_div_p * (1.0 - ramp_eval(p.R_div_p, x)) *
             (1.0 - ramp_eval(p.Rbar_div_p, rho)) -
         rho_e * p.q_ex_e * ramp_eval(p.R_ex_e, x) * ramp_eval(p.Rbar_ex_e, rho) -
         rho_g * p.q_ex_g * ramp_eval(p.R_ex_g, x) * ramp_eval(p.Rbar_ex_g, rho);
}

double q_inf(const Parameters& p) noexcept {
  return std::max({p.q_div_s, p.q_s_p, p.q_div_p, p.q_p_e, p.q_p_g, p.q_ex_e, p.q_ex_g});
}

double m_inf_eps(const Parameters& p, double rho0_sup, double eps) noexcept {
  return std::max(rho0_sup, p.density_plateau()) + eps;
}

}  // namespace crypt_sim
