#pragma once

#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "crypt_sim/grid.hpp"
#include "crypt_sim/scheme.hpp"

namespace crypt_sim {

/// Closed-form initial data. Densities and concentration are functions of
/// x in [0, 1]; sample() turns them into cell averages.
struct Scenario {
  std::string name;
  std::array<std::function<double(double)>, 4> rho0;
  std::function<double(double)> c_b0;

  /// Cell averages by 16-point midpoint subsampling. Throws ValidationError
  /// on negative or non-finite data or c_b0(1) != 0.
  InitialData sample(const Grid& grid) const;
};

/// "crypt-default", "segregated-steps", "uniform-mix", "vacuum-bottom-only".
Scenario builtin_scenario(std::string_view name);
std::vector<std::string> builtin_scenario_names();

struct ConvergenceRow {
  double param = 0.0;
  double error = 0.0;
  double order = 0.0;  // NaN on the first row
  bool failed = false;
  std::string message;
};

/// Errors against a swept knob; order_k = log(e_{k-1}/e_k) / log(p_{k-1}/p_k),
/// which is log2 of the error ratio for halved parameters.
struct ConvergenceTable {
  std::string parameter;
  std::string quantity;
  std::vector<ConvergenceRow> rows;

  void add(double param, double error);
  void add_failure(double param, std::string message);

  /// Least-squares slope of log(error) against log(param) over the usable rows.
  double estimated_order() const;
  /// Smallest row-to-row order.
  double min_order() const;
  bool strictly_decreasing() const;
  bool any_failed() const;
};

/// Cauchy differences of the total density between consecutive viscosities:
/// e_k = sqrt(dt sum_{n>=1} ||rho^{eps_k, n} - rho^{eps_{k+1}, n}||^2).
/// eps_list must be strictly monotone with values in (0, 1).
ConvergenceTable viscosity_sweep(const Scenario& scenario, const SchemeConfig& base,
                                 const std::vector<double>& eps_list);

struct RefinementStudy {
  ConvergenceTable rho;     // L2 error of the total density at t_end
  ConvergenceTable c_b;     // L2 error of the concentration at t_end
  ConvergenceTable defect;  // max over steps of ||rho - sum rho_i||_inf, every entry
};

/// dt_list strictly decreasing; its last entry is the reference run.
RefinementStudy dt_refinement(const Scenario& scenario, const SchemeConfig& base,
                              const std::vector<double>& dt_list);

/// n_list strictly increasing; its last entry is the reference grid and must
/// be a multiple of every other entry. Errors use block averages of the
/// reference solution; the table parameter is dx = 1 / N.
RefinementStudy grid_refinement(const Scenario& scenario, const SchemeConfig& base,
                                const std::vector<std::size_t>& n_list);

/// Average blocks of fine cells onto a coarser grid whose size divides the fine one.
Field restrict_to(const Field& fine, const Grid& coarse);

/// Worker count for sweeps: CRYPT_SIM_THREADS if set, otherwise hardware concurrency.
std::size_t sweep_threads();

}  // namespace crypt_sim
