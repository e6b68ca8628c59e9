#pragma once

#include <array>
#include <string_view>

namespace crypt_sim {

/// Smooth cubic threshold: 0 below K - kappa, 1 above K + kappa, C1 in between.
struct RampSpec {
  double K = 1.0;
  double kappa = 0.5;

  /// kappa > 0 and K - kappa > 0.
  bool valid() const noexcept;

  friend bool operator==(const RampSpec&, const RampSpec&) = default;
};

double ramp_eval(const RampSpec& spec, double y) noexcept;

/// Exact derivative of ramp_eval; peaks at 3 / (4 kappa) for y = K.
double ramp_derivative(const RampSpec& spec, double y) noexcept;

/// Lipschitz constant of the ramp, i.e. max of ramp_derivative.
double ramp_lipschitz(const RampSpec& spec) noexcept;

/// Model constants. Spatial ramps take x in [0, 1], density ramps take the
/// total density, concentration ramps take the butyrate concentration.
struct Parameters {
  // rates (1 / time)
  double q_div_s = 1.0;
  double q_s_p = 1.0;
  double q_div_p = 1.0;
  double q_p_e = 1.0;
  double q_p_g = 1.0;
  double q_ex_e = 1.0;
  double q_ex_g = 1.0;

  double sigma_b = 1.0;  // butyrate diffusivity
  double gamma = 1.0;    // butyrate production rate
  double c_b_d = 1.0;    // Dirichlet offset concentration

  // spatial
  RampSpec R_div_s{0.35, 0.1};
  RampSpec R_s_p{0.25, 0.1};
  RampSpec R_div_p{0.8, 0.1};
  RampSpec R_p_e{0.6, 0.1};
  RampSpec R_p_g{0.6, 0.1};
  RampSpec R_ex_e{0.9, 0.08};
  RampSpec R_ex_g{0.9, 0.08};

  // density
  RampSpec Rbar_div_s{1.0, 0.2};
  RampSpec Rbar_div_p{1.0, 0.2};
  RampSpec Rbar_ex_e{1.0, 0.2};
  RampSpec Rbar_ex_g{1.0, 0.2};

  // concentration
  RampSpec Runder_div_s{0.5, 0.2};
  RampSpec Runder_p_e{0.5, 0.2};
  RampSpec Runder_p_g{0.5, 0.2};

  /// Throws ValidationError naming the first violated constraint.
  void validate() const;

  /// Common plateau of the density ramps: max over them of K + kappa.
  double density_plateau() const noexcept;

  /// Largest Lipschitz constant among all fourteen ramps.
  double max_ramp_lipschitz() const noexcept;

  friend bool operator==(const Parameters&, const Parameters&) = default;
};

/// Named access to the rate fields, used by config I/O.
struct RateField {
  std::string_view name;
  double Parameters::*member;
};
struct RampField {
  std::string_view name;
  RampSpec Parameters::*member;
};
const std::array<RateField, 10>& scalar_parameter_fields();
const std::array<RampField, 14>& ramp_parameter_fields();

struct SourceTerms {
  double s = 0.0;
  double p = 0.0;
  double e = 0.0;
  double g = 0.0;

  double sum() const noexcept { return s + p + e + g; }
};

/// Division, differentiation and extrusion rates for the four cell types.
/// `rho` is the argument of the density ramps (the scheme passes rho - eps).
SourceTerms source_terms(double x, double rho, double rho_s, double rho_p, double rho_e,
                         double rho_g, double c_b, const Parameters& p) noexcept;

/// Sum of the four source terms; differentiation transfers cancel.
double total_source(double x, double rho, double rho_s, double rho_p, double rho_e,
                    double rho_g, double c_b, const Parameters& p) noexcept;

/// Largest of the seven rates.
double q_inf(const Parameters& p) noexcept;

/// max(rho0_sup, density plateau) + eps: the a priori upper bound on the
/// regularized total density.
double m_inf_eps(const Parameters& p, double rho0_sup, double eps) noexcept;

}  // namespace crypt_sim
