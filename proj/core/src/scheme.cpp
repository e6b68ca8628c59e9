#include "crypt_sim/scheme.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "crypt_sim/errors.hpp"

namespace crypt_sim {

// ---------------------------------------------------------------------------
// State / SchemeConfig

std::string_view name(Species i) noexcept {
  switch (i) {
    case Species::s: return "s";
    case Species::p: return "p";
    case Species::e: return "e";
    case Species::g: return "g";
  }
  return "?";
}

State::State(const Grid& grid)
    : rho{Field(grid), Field(grid), Field(grid), Field(grid)}, c_b(grid), t(0.0) {}

State::State(std::array<Field, 4> densities, Field concentration, double time)
    : rho(std::move(densities)), c_b(std::move(concentration)), t(time) {
  for (const Field& r : rho) {
    if (!(r.grid() == c_b.grid())) throw ValidationError("state fields live on different grids");
  }
}

Field State::total() const {
  Field sum = rho[0];
  sum += rho[1];
  sum += rho[2];
  sum += rho[3];
  return sum;
}

SchemeConfig::SchemeConfig(Grid grid, Parameters params, double eps, double dt, double t_end,
                           SolverOptions options, double rho0_sup)
    : grid_(grid),
      params_(params),
      eps_(eps),
      dt_(dt),
      t_end_(t_end),
      options_(options),
      rho0_sup_(rho0_sup) {
  params_.validate();
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError(fmt::format("eps = {} must satisfy 0 < eps < 1", eps));
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError(fmt::format("dt = {} must be positive", dt));
  const double qdt = crypt_sim::q_inf(params_) * dt;
  if (!(qdt < 1.0)) throw ValidationError(fmt::format("q_inf*dt = {} >= 1", qdt));
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw ValidationError(fmt::format("t_end = {} must be >= 0", t_end));
  }
  if (!(options.picard_tol > 0.0)) {
    throw ValidationError(fmt::format("picard_tol = {} must be > 0", options.picard_tol));
  }
  if (options.picard_max < 1) {
    throw ValidationError(fmt::format("picard_max = {} must be >= 1", options.picard_max));
  }
  if (!(rho0_sup >= 0.0) || !std::isfinite(rho0_sup)) {
    throw ValidationError(fmt::format("rho0_sup = {} must be >= 0", rho0_sup));
  }
}

double SchemeConfig::m_inf() const noexcept { return m_inf_eps(params_, rho0_sup_, eps_); }
double SchemeConfig::q_inf() const noexcept { return crypt_sim::q_inf(params_); }

std::size_t SchemeConfig::step_count() const {
  const double ratio = t_end_ / dt_;
  const double steps = std::round(ratio);
  if (std::abs(steps * dt_ - t_end_) > 1e-9 * std::max(1.0, t_end_)) {
    throw ValidationError(fmt::format("t_end = {} is not a multiple of dt = {}", t_end_, dt_));
  }
  return static_cast<std::size_t>(steps);
}

SchemeConfig SchemeConfig::with_eps(double eps) const {
  return {grid_, params_, eps, dt_, t_end_, options_, rho0_sup_};
}
SchemeConfig SchemeConfig::with_dt(double dt) const {
  return {grid_, params_, eps_, dt, t_end_, options_, rho0_sup_};
}
SchemeConfig SchemeConfig::with_t_end(double t_end) const {
  return {grid_, params_, eps_, dt_, t_end, options_, rho0_sup_};
}
SchemeConfig SchemeConfig::with_grid(Grid grid) const {
  return {grid, params_, eps_, dt_, t_end_, options_, rho0_sup_};
}
SchemeConfig SchemeConfig::with_params(Parameters params) const {
  return {grid_, params, eps_, dt_, t_end_, options_, rho0_sup_};
}
SchemeConfig SchemeConfig::with_options(SolverOptions options) const {
  return {grid_, params_, eps_, dt_, t_end_, options, rho0_sup_};
}
SchemeConfig SchemeConfig::with_rho0_sup(double rho0_sup) const {
  return {grid_, params_, eps_, dt_, t_end_, options_, rho0_sup};
}

double default_dt(const Parameters& p) noexcept { return std::min(1e-3, 0.5 / q_inf(p)); }

// ---------------------------------------------------------------------------
// Initial data

double InitialData::rho0_sup() const {
  Field total = rho0[0];
  total += rho0[1];
  total += rho0[2];
  total += rho0[3];
  return linf(total);
}

State regularize_initial(const InitialData& data, double eps) {
  std::array<Field, 4> rho = data.rho0;
  for (Field& r : rho) r += 0.25 * eps;
  return State(std::move(rho), data.c_b0, 0.0);
}

// ---------------------------------------------------------------------------
// Per-step solves

namespace {

void require_m_matrix(const TridiagonalSystem& sys, std::string_view what) {
  if (!sys.is_m_matrix()) {
    throw InvariantViolation(fmt::format("{} system lost its M-matrix structure", what));
  }
}

/// Linear rate of species i in its own source and the transfer coefficient
/// from its feeding species; f_i = self * rho_i + gain * rho_feed.
struct SpeciesRates {
  double self = 0.0;
  double gain = 0.0;
};

std::optional<Species> feeder(Species i) noexcept {
  switch (i) {
    case Species::s: return std::nullopt;
    case Species::p: return Species::s;
    case Species::e: return Species::p;
    case Species::g: return Species::p;
  }
  return std::nullopt;
}

double component(const SourceTerms& f, Species i) noexcept {
  switch (i) {
    case Species::s: return f.s;
    case Species::p: return f.p;
    case Species::e: return f.e;
    case Species::g: return f.g;
  }
  return 0.0;
}

SpeciesRates species_rates(Species i, double x, double rho_arg, double c_b, const Parameters& p) {
  // The source terms are linear in the partial densities, so unit inputs
  // recover the coefficients.
  std::array<double, 4> unit{};
  unit[index(i)] = 1.0;
  SpeciesRates r;
  r.self = component(source_terms(x, rho_arg, unit[0], unit[1], unit[2], unit[3], c_b, p), i);
  if (auto f = feeder(i)) {
    std::array<double, 4> feed{};
    feed[index(*f)] = 1.0;
    r.gain = component(source_terms(x, rho_arg, feed[0], feed[1], feed[2], feed[3], c_b, p), i);
  }
  return r;
}

const Field& feeding_density(Species i, const SolvedPartials& solved) {
  const auto f = feeder(i);
  if (!f) throw ValidationError("species has no feeding species");
  const auto& value = solved[index(*f)];
  if (!value) {
    throw ValidationError(fmt::format("rho_{} must be solved before rho_{}", name(*f), name(i)));
  }
  return *value;
}

/// Face velocity u_{j+1/2} = -(rho_{j+1} - rho_j) / dx.
std::vector<double> face_velocity(const Field& rho_new) {
  std::vector<double> u = face_gradient(rho_new);
  for (double& v : u) v = -v;
  return u;
}

}  // namespace

TotalDensityStep step_total_density(const State& state, const SchemeConfig& cfg) {
  const Grid& grid = cfg.grid();
  const std::size_t n = grid.size();
  const double dx = grid.dx();
  const double dt = cfg.dt();
  const double eps = cfg.eps();
  const Parameters& params = cfg.params();
  const Field rho_old = state.total();

  TridiagonalSystem sys(n);
  const double r = dt / (dx * dx);
  std::fill(sys.diag.begin(), sys.diag.end(), 1.0);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double d = r * (eps + 0.5 * (rho_old[j] + rho_old[j + 1]));
    sys.diag[j] += d;
    sys.diag[j + 1] += d;
    sys.upper[j] = -d;
    sys.lower[j] = -d;
  }
  require_m_matrix(sys, "total density");

  Field source(grid);
  auto map = [&](const Field& v) {
    for (std::size_t j = 0; j < n; ++j) {
      source[j] = total_source(grid.center(j), v[j] - eps, state.rho[0][j], state.rho[1][j],
                               state.rho[2][j], state.rho[3][j], state.c_b[j], params);
      sys.rhs[j] = rho_old[j] + dt * source[j];
    }
    return Field(grid, solve_tridiagonal(sys));
  };
  const auto& opt = cfg.options();
  PicardResult fixed = picard_fixed_point(map, rho_old, opt.picard_tol, opt.picard_max);

  const double lo = fixed.value.min();
  const double hi = fixed.value.max();
  if (lo < eps - kBoundTolerance || hi > cfg.m_inf() + kBoundTolerance) {
    throw InvariantViolation(fmt::format(
        "total density left [eps, M] = [{:g}, {:g}]: min {:.17g}, max {:.17g} at t = {:g}", eps,
        cfg.m_inf(), lo, hi, state.t + dt));
  }
  return {std::move(fixed.value), std::move(source), fixed.iterations};
}

Field step_partial_density(Species species, const State& state, const Field& rho_new,
                           const SolvedPartials& solved, const SchemeConfig& cfg) {
  const Grid& grid = cfg.grid();
  const std::size_t n = grid.size();
  const double dx = grid.dx();
  const double dt = cfg.dt();
  const double eps = cfg.eps();
  const Parameters& params = cfg.params();
  const Field& old = state[species];
  const Field* feed = feeder(species) ? &feeding_density(species, solved) : nullptr;

  TridiagonalSystem sys(n);
  const double diff = eps * dt / (dx * dx);
  const double adv = dt / dx;
  for (std::size_t j = 0; j < n; ++j) {
    const auto rates = species_rates(species, grid.center(j), rho_new[j] - eps, state.c_b[j], params);
    sys.diag[j] = 1.0 - dt * rates.self;
    sys.rhs[j] = old[j] + (feed ? dt * rates.gain * (*feed)[j] : 0.0);
  }
  const std::vector<double> u = face_velocity(rho_new);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double up = std::max(u[j], 0.0);
    const double down = std::min(u[j], 0.0);
    // flux through face j+1/2: -eps (r_{j+1} - r_j) / dx + up r_j + down r_{j+1}
    sys.diag[j] += diff + adv * up;
    sys.upper[j] = -diff + adv * down;
    sys.diag[j + 1] += diff - adv * down;
    sys.lower[j] = -diff - adv * up;
  }
  require_m_matrix(sys, fmt::format("rho_{}", name(species)));

  Field out(grid, solve_tridiagonal(sys));
  if (out.min() < -kNegativityTolerance) {
    throw InvariantViolation(fmt::format("rho_{} became negative ({:.3e}) at t = {:g}", name(species),
                                         out.min(), state.t + dt));
  }
  return out;
}

Field truncated_partial_density(Species species, const State& state, const Field& rho_new,
                                const SolvedPartials& solved, const Field& start,
                                const SchemeConfig& cfg) {
  const Grid& grid = cfg.grid();
  const std::size_t n = grid.size();
  const double dx = grid.dx();
  const double dt = cfg.dt();
  const double eps = cfg.eps();
  const double m = cfg.m_inf();
  const Field& old = state[species];
  const Field* feed = feeder(species) ? &feeding_density(species, solved) : nullptr;

  TridiagonalSystem sys(n);
  const double diff = eps * dt / (dx * dx);
  std::fill(sys.diag.begin(), sys.diag.end(), 1.0);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    sys.diag[j] += diff;
    sys.diag[j + 1] += diff;
    sys.upper[j] = -diff;
    sys.lower[j] = -diff;
  }
  std::vector<SpeciesRates> rates(n);
  for (std::size_t j = 0; j < n; ++j) {
    rates[j] = species_rates(species, grid.center(j), rho_new[j] - eps, state.c_b[j], cfg.params());
  }
  const std::vector<double> u = face_velocity(rho_new);

  auto map = [&](const Field& v) {
    std::vector<double> tv(n);
    for (std::size_t j = 0; j < n; ++j) tv[j] = std::clamp(v[j], 0.0, m);
    for (std::size_t j = 0; j < n; ++j) {
      sys.rhs[j] = old[j] + dt * rates[j].self * tv[j] + (feed ? dt * rates[j].gain * (*feed)[j] : 0.0);
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double flux = std::max(u[j], 0.0) * tv[j] + std::min(u[j], 0.0) * tv[j + 1];
      sys.rhs[j] -= dt / dx * flux;
      sys.rhs[j + 1] += dt / dx * flux;
    }
    return Field(grid, solve_tridiagonal(sys));
  };
  const auto& opt = cfg.options();
  return picard_fixed_point(map, start, opt.picard_tol, opt.picard_max).value;
}

Field step_concentration(const State& state, const Field& rho_e_new, const Field& rho_g_new,
                         const SchemeConfig& cfg) {
  const Grid& grid = cfg.grid();
  const std::size_t n = grid.size();
  const double dx = grid.dx();
  const double dt = cfg.dt();
  const Parameters& p = cfg.params();

  TridiagonalSystem sys(n);
  const double d = p.sigma_b * dt / (dx * dx);
  std::fill(sys.diag.begin(), sys.diag.end(), 1.0);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    sys.diag[j] += d;
    sys.diag[j + 1] += d;
    sys.upper[j] = -d;
    sys.lower[j] = -d;
  }
  // c = 0 at x = 1, half a cell beyond the last centre
  sys.diag[n - 1] += 2.0 * d;
  for (std::size_t j = 0; j < n; ++j) {
    const double c = state.c_b[j];
    const double uptake = (c + p.c_b_d) / (1.0 + c + p.c_b_d);
    sys.rhs[j] = c + p.gamma * dt * uptake * (rho_e_new[j] + rho_g_new[j]);
  }
  require_m_matrix(sys, "butyrate");

  Field out(grid, solve_tridiagonal(sys));
  if (out.min() < -kNegativityTolerance) {
    throw InvariantViolation(
        fmt::format("c_b became negative ({:.3e}) at t = {:g}", out.min(), state.t + dt));
  }
  return out;
}

StepResult advance(const State& state, const SchemeConfig& cfg) {
  const Field rho_old = state.total();
  TotalDensityStep total = step_total_density(state, cfg);
  const auto& opt = cfg.options();

  StepReport rep;
  rep.picard_iters = total.picard_iters;

  SolvedPartials solved;
  for (Species i : kAllSpecies) {
    if (i == Species::g && opt.subtract_g) {
      Field g = total.rho;
      g -= *solved[index(Species::s)];
      g -= *solved[index(Species::p)];
      g -= *solved[index(Species::e)];
      solved[index(i)] = std::move(g);
      continue;
    }
    Field r = step_partial_density(i, state, total.rho, solved, cfg);
    if (opt.debug_truncation) {
      Field truncated = truncated_partial_density(i, state, total.rho, solved, r, cfg);
      rep.truncation_delta = std::max(rep.truncation_delta, linf(truncated - r));
      r = std::move(truncated);
    }
    solved[index(i)] = std::move(r);
  }
  std::array<Field, 4> partials{std::move(*solved[0]), std::move(*solved[1]), std::move(*solved[2]),
                                std::move(*solved[3])};
  Field c_new = step_concentration(state, partials[2], partials[3], cfg);

  State next(std::move(partials), std::move(c_new), state.t + cfg.dt());

  const double eps = cfg.eps();
  const double m = cfg.m_inf();
  rep.t = next.t;
  rep.min_rho = total.rho.min();
  rep.max_rho = total.rho.max();
  rep.min_partial = std::min({next.rho[0].min(), next.rho[1].min(), next.rho[2].min(), next.rho[3].min()});
  rep.min_cb = next.c_b.min();

  const auto e25 = check_energy_total(rho_old, total.rho, cfg);
  rep.energy_25_lhs = e25.lhs;
  rep.energy_25_rhs = e25.rhs;
  rep.energy_25_ok = e25.ok;
  for (Species i : kAllSpecies) {
    const auto e26 = check_energy_partial(i, state[i], next[i], total.rho, cfg);
    rep.energy_26_margin[index(i)] = e26.margin;
    rep.energy_26_rhs[index(i)] = e26.rhs;
    if (e26.margin < -kPartialEnergyTolerance * e26.rhs) rep.energy_26_ok = false;
  }
  const auto e27 = check_energy_concentration(state.c_b, next.c_b, cfg);
  rep.energy_27_lhs = e27.lhs;
  rep.energy_27_rhs = e27.rhs;
  rep.energy_27_ok = e27.ok;

  rep.tv_w = tv_weights(next);
  rep.grad_rho_l2_sq = gradient_norm_sq(total.rho);
  rep.grad_cb_l2_sq = dirichlet_gradient_norm_sq(next.c_b);
  rep.consistency_defect = consistency_defect(total.rho, next.rho);
  rep.mass_residual = integrate(total.rho) - integrate(rho_old) - cfg.dt() * integrate(total.source);

  rep.max_principle_ok = rep.min_rho >= eps - kBoundTolerance && rep.max_rho <= m + kBoundTolerance;
  rep.nonnegativity_ok = rep.min_partial >= -kNegativityTolerance && rep.min_cb >= -kNegativityTolerance;
  rep.mass_ok = std::abs(rep.mass_residual) <= kMassTolerance;

  return {std::move(next), rep};
}

// ---------------------------------------------------------------------------
// Trajectories

namespace {

std::string describe_failures(const StepReport& r) {
  std::string out;
  auto add = [&](bool ok, std::string_view what) {
    if (ok) return;
    if (!out.empty()) out += ", ";
    out += what;
  };
  add(r.max_principle_ok, "maximum principle");
  add(r.nonnegativity_ok, "nonnegativity");
  add(r.energy_25_ok, "total-density energy bound");
  add(r.energy_26_ok, "partial-density energy bound (>10%)");
  add(r.energy_27_ok, "butyrate energy bound");
  add(r.mass_ok, "mass balance");
  return out;
}

constexpr std::size_t kMaxWarnings = 200;

}  // namespace

Trajectory run(const InitialData& data, const SchemeConfig& base_cfg,
               const std::vector<double>& output_times, const StepObserver& observer) {
  const SchemeConfig cfg = base_cfg.with_rho0_sup(std::max(base_cfg.rho0_sup(), data.rho0_sup()));
  const std::size_t steps = cfg.step_count();

  std::set<std::size_t> snapshot_steps;
  for (double t : output_times) {
    const double k = std::round(t / cfg.dt());
    snapshot_steps.insert(static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(steps))));
  }
  if (output_times.empty()) snapshot_steps.insert(steps);
  snapshot_steps.erase(0);

  Trajectory traj;
  State state = regularize_initial(data, cfg.eps());
  traj.snapshots.push_back(state);
  traj.reports.reserve(steps);

  std::size_t suppressed = 0;
  auto warn = [&](std::string msg) {
    if (traj.warnings.size() < kMaxWarnings) {
      traj.warnings.push_back(std::move(msg));
    } else {
      ++suppressed;
    }
  };

  for (std::size_t k = 1; k <= steps; ++k) {
    try {
      StepResult step = advance(state, cfg);
      step.report.step = k;
      const StepReport& rep = step.report;
      for (Species i : kAllSpecies) {
        const double margin = rep.energy_26_margin[index(i)];
        if (margin < 0.0) {
          warn(fmt::format("step {} (t = {:g}): partial energy bound for rho_{} exceeded by {:.3e} "
                           "(relative {:.3e})",
                           k, rep.t, name(i), -margin, -margin / rep.energy_26_rhs[index(i)]));
        }
      }
      const bool ok = rep.hard_ok() && rep.energy_26_ok;
      if (!ok) {
        const std::string msg =
            fmt::format("step {} (t = {:g}): failed {}", k, rep.t, describe_failures(rep));
        if (cfg.options().strict) throw InvariantViolation(msg);
        warn(msg);
      }
      state = std::move(step.state);
      traj.reports.push_back(rep);
      if (observer) observer(state, rep);
      if (snapshot_steps.contains(k)) traj.snapshots.push_back(state);
    } catch (const InvariantViolation& e) {
      traj.failure = FailureKind::invariant;
      traj.error = e.what();
      break;
    } catch (const Error& e) {
      traj.failure = FailureKind::solver;
      traj.error = e.what();
      break;
    }
  }
  if (suppressed > 0) traj.warnings.push_back(fmt::format("{} further warnings suppressed", suppressed));
  return traj;
}

std::size_t fingerprint(const SchemeConfig& cfg) noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  };
  auto mix_d = [&](double d) { mix(std::bit_cast<std::uint64_t>(d)); };
  mix(cfg.grid().size());
  mix_d(cfg.eps());
  mix_d(cfg.dt());
  mix_d(cfg.t_end());
  mix_d(cfg.rho0_sup());
  const auto& o = cfg.options();
  mix_d(o.picard_tol);
  mix(static_cast<std::uint64_t>(o.picard_max));
  mix(o.subtract_g);
  mix(o.debug_truncation);
  mix(o.strict);
  const Parameters& p = cfg.params();
  for (const auto& f : scalar_parameter_fields()) mix_d(p.*f.member);
  for (const auto& f : ramp_parameter_fields()) {
    mix_d((p.*f.member).K);
    mix_d((p.*f.member).kappa);
  }
  return h;
}

}  // namespace crypt_sim
