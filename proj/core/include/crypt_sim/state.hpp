#pragma once

#include <array>
#include <cstddef>
#include <string_view>

#include "crypt_sim/grid.hpp"
#include "crypt_sim/model.hpp"

namespace crypt_sim {

/// Cell types in solve order: stem, progenitor, enterocyte, goblet.
enum class Species : std::size_t { s = 0, p = 1, e = 2, g = 3 };

inline constexpr std::array<Species, 4> kAllSpecies{Species::s, Species::p, Species::e,
                                                    Species::g};

constexpr std::size_t index(Species i) noexcept { return static_cast<std::size_t>(i); }
std::string_view name(Species i) noexcept;

/// The four cell densities and the butyrate concentration at time t.
struct State {
  std::array<Field, 4> rho;
  Field c_b;
  double t = 0.0;

  explicit State(const Grid& grid);
  State(std::array<Field, 4> densities, Field concentration, double time = 0.0);

  const Grid& grid() const noexcept { return c_b.grid(); }
  Field& operator[](Species i) noexcept { return rho[index(i)]; }
  const Field& operator[](Species i) const noexcept { return rho[index(i)]; }

  /// rho_s + rho_p + rho_e + rho_g
  Field total() const;
};

/// Solver knobs that do not affect the discrete equations themselves.
struct SolverOptions {
  double picard_tol = 1e-10;
  int picard_max = 100;
  /// Recover rho_g as rho - (rho_s + rho_p + rho_e) instead of solving for it.
  bool subtract_g = false;
  /// Re-solve each partial density with the [0, M] truncation inside the
  /// advective flux and self-source, and record the change.
  bool debug_truncation = false;
  /// Abort a run on any failed energy / mass / monitored-bound check.
  bool strict = true;

  friend bool operator==(const SolverOptions&, const SolverOptions&) = default;
};

/// Validated configuration for one regularized simulation. The constructor
/// rejects 0 < eps < 1 violations and q_inf * dt >= 1.
class SchemeConfig {
 public:
  SchemeConfig(Grid grid, Parameters params, double eps, double dt, double t_end,
               SolverOptions options = {}, double rho0_sup = 0.0);

  const Grid& grid() const noexcept { return grid_; }
  const Parameters& params() const noexcept { return params_; }
  double eps() const noexcept { return eps_; }
  double dt() const noexcept { return dt_; }
  double t_end() const noexcept { return t_end_; }
  const SolverOptions& options() const noexcept { return options_; }

  /// sup of the unregularized initial total density.
  double rho0_sup() const noexcept { return rho0_sup_; }
  /// max(rho0_sup, plateau) + eps
  double m_inf() const noexcept;
  double q_inf() const noexcept;

  /// Number of steps to reach t_end; throws ValidationError if t_end / dt is
  /// not an integer up to rounding.
  std::size_t step_count() const;

  SchemeConfig with_eps(double eps) const;
  SchemeConfig with_dt(double dt) const;
  SchemeConfig with_t_end(double t_end) const;
  SchemeConfig with_grid(Grid grid) const;
  SchemeConfig with_params(Parameters params) const;
  SchemeConfig with_options(SolverOptions options) const;
  SchemeConfig with_rho0_sup(double rho0_sup) const;

  friend bool operator==(const SchemeConfig&, const SchemeConfig&) = default;

 private:
  Grid grid_;
  Parameters params_;
  double eps_;
  double dt_;
  double t_end_;
  SolverOptions options_;
  double rho0_sup_;
};

/// min(1e-3, 0.5 / q_inf)
double default_dt(const Parameters& p) noexcept;

}  // namespace crypt_sim
