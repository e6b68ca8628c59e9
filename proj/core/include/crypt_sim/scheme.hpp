#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "crypt_sim/diagnostics.hpp"
#include "crypt_sim/grid.hpp"
#include "crypt_sim/solver.hpp"
#include "crypt_sim/state.hpp"

namespace crypt_sim {

/// Unregularized initial data sampled on a grid.
struct InitialData {
  std::array<Field, 4> rho0;
  Field c_b0;

  double rho0_sup() const;
};

/// rho_i = rho_i^0 + eps / 4, so the total is lifted by eps; c_b unchanged.
State regularize_initial(const InitialData& data, double eps);

struct TotalDensityStep {
  Field rho;            // rho^{n+1}
  Field source;         // f evaluated at the iterate used for the final solve
  int picard_iters = 0;
};

/// Finite-volume form of
///   v - eps dt v'' - dt (rho^n v')' = rho^n + dt f(x, v - eps, rho_i^n, c^n)
/// with face coefficient eps + (rho_j^n + rho_{j+1}^n) / 2 and Neumann
/// boundaries. The source is lagged one Picard iterate, starting from
/// v_0 = rho^n. Throws NoConvergence, or InvariantViolation if the result
/// leaves [eps, M].
TotalDensityStep step_total_density(const State& state, const SchemeConfig& cfg);

/// New partial densities available to the source of a later species.
using SolvedPartials = std::array<std::optional<Field>, 4>;

/// Linear solve for one species:
///   r - eps dt r'' - dt (r rho_new')' = rho_i^n + dt f_i(x, rho_new - eps, ..., c^n).
/// Advection uses the donor cell against u = -d rho_new; source terms
/// proportional to r are implicit and transfers from the feeding species
/// (s for p, p for e and g) come from `solved`. Throws ValidationError when
/// the feeding species is missing, InvariantViolation on negative output.
Field step_partial_density(Species species, const State& state, const Field& rho_new,
                           const SolvedPartials& solved, const SchemeConfig& cfg);

/// Same equation with the truncation [0, M] applied to the lagged density
/// inside the advective flux and the self-source, iterated to a fixed point
/// from `start`.
Field truncated_partial_density(Species species, const State& state, const Field& rho_new,
                                const SolvedPartials& solved, const Field& start,
                                const SchemeConfig& cfg);

/// c - sigma_b dt c'' = c^n + gamma dt (c^n + c_d) / (1 + c^n + c_d) (rho_e + rho_g)
/// with zero flux at x = 0 and c = 0 at x = 1 (half-cell ghost).
Field step_concentration(const State& state, const Field& rho_e_new, const Field& rho_g_new,
                         const SchemeConfig& cfg);

struct StepResult {
  State state;
  StepReport report;
};

/// One full step: total density, then s, p, e, g, then butyrate.
StepResult advance(const State& state, const SchemeConfig& cfg);

enum class FailureKind { none, solver, invariant };

struct Trajectory {
  std::vector<State> snapshots;     // initial state first
  std::vector<StepReport> reports;  // one per completed step
  std::vector<std::string> warnings;
  FailureKind failure = FailureKind::none;
  std::string error;

  bool ok() const noexcept { return failure == FailureKind::none; }
};

using StepObserver = std::function<void(const State&, const StepReport&)>;

/// Advances from regularize_initial(data, eps) to t_end. A snapshot is stored
/// for the initial state and for the step nearest each requested time. On a
/// solver or invariant failure the partial trajectory is returned with the
/// error recorded.
Trajectory run(const InitialData& data, const SchemeConfig& cfg,
               const std::vector<double>& output_times = {}, const StepObserver& observer = {});

/// Hash of every field of the configuration; used to check sweep rows.
std::size_t fingerprint(const SchemeConfig& cfg) noexcept;

}  // namespace crypt_sim
