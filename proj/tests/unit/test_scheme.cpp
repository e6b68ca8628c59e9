#include <doctest.h>

#include <cmath>
#include <random>

#include "crypt_sim/errors.hpp"
#include "crypt_sim/experiments.hpp"
#include "crypt_sim/scheme.hpp"
#include "dense_oracle.hpp"
#include "fixtures.hpp"

using namespace crypt_sim;

namespace {

Parameters no_rates() {
  Parameters p;
  p.q_div_s = p.q_s_p = p.q_div_p = p.q_p_e = p.q_p_g = p.q_ex_e = p.q_ex_g = 0.0;
  return p;
}

State uniform_state(const Grid& g, double each, double c) {
  return State({Field(g, each), Field(g, each), Field(g, each), Field(g, each)}, Field(g, c));
}

double max_diff(const Field& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

}  // namespace

TEST_SUITE("scheme") {

TEST_CASE("scheme config rejects invalid knobs") {
  const Grid g(10);
  CHECK_THROWS_WITH_AS(SchemeConfig(g, Parameters{}, 0.1, 2.0, 2.0), doctest::Contains("q_inf*dt"),
                       ValidationError);
  CHECK_THROWS_AS(SchemeConfig(g, Parameters{}, 0.1, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(SchemeConfig(g, Parameters{}, 0.0, 1e-3, 1.0), ValidationError);
  CHECK_THROWS_AS(SchemeConfig(g, Parameters{}, 1.0, 1e-3, 1.0), ValidationError);
  CHECK_THROWS_AS(SchemeConfig(g, Parameters{}, 0.1, 1e-3, -1.0), ValidationError);
  CHECK_THROWS_AS(SchemeConfig(g, Parameters{}, 0.1, 1e-3, 1.0, SolverOptions{0.0}), ValidationError);
  CHECK_THROWS_AS(SchemeConfig(g, Parameters{}, 0.1, 3e-3, 1.0).step_count(), ValidationError);
  CHECK(SchemeConfig(g, Parameters{}, 0.1, 1e-3, 1.0).step_count() == 1000);
  CHECK(default_dt(Parameters{}) == 1e-3);
  Parameters fast;
  fast.q_ex_g = 1000.0;
  CHECK(default_dt(fast) == 5e-4);
}

TEST_CASE("regularized initial data") {
  const Grid g(6);
  InitialData zero{{Field(g), Field(g), Field(g), Field(g)}, Field(g)};
  const State s = regularize_initial(zero, 0.1);
  for (const Field& r : s.rho) CHECK(r.min() == doctest::Approx(0.025));
  CHECK(s.total().max() == doctest::Approx(0.1));

  InitialData stem{{Field(g, 1.0), Field(g), Field(g), Field(g)}, Field(g)};
  CHECK(regularize_initial(stem, 0.4).total().min() == doctest::Approx(1.4));

  const InitialData data = builtin_scenario("crypt-default").sample(Grid(200));
  Field rho0 = data.rho0[0] + data.rho0[1];
  rho0 += data.rho0[2];
  rho0 += data.rho0[3];
  const Field reg = regularize_initial(data, 0.01).total();
  for (std::size_t j = 0; j < 200; ++j) CHECK(reg[j] == doctest::Approx(rho0[j] + 0.01).epsilon(1e-14));
  CHECK(reg.min() == doctest::Approx(rho0.min() + 0.01).epsilon(1e-14));
}

TEST_CASE("total density: constants are exact without sources") {
  const Grid g(12);
  const SchemeConfig cfg(g, no_rates(), 0.1, 1e-3, 1e-3, {}, 1.0);
  const auto step = step_total_density(uniform_state(g, 0.2, 0.3), cfg);
  for (std::size_t j = 0; j < 12; ++j) CHECK(step.rho[j] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("total density: saturated density ramps make the source independent of v") {
  const Grid g(8);
  const Parameters p;
  State s(g);
  for (std::size_t j = 0; j < 8; ++j) {
    s.rho[0][j] = 0.8 + 0.05 * j;
    s.rho[1][j] = 0.6;
  }
  const double eps = 0.05;
  REQUIRE(s.total().min() >= p.density_plateau() + eps);
  const SchemeConfig cfg(g, p, eps, 1e-3, 1e-3, {}, s.total().max());
  const auto step = step_total_density(s, cfg);
  CHECK(step.picard_iters == 2);
}

TEST_CASE("one step against the dense oracle, N = 4") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    oracle::Input in = fixtures::random_input(rng, 4);
    if (trial == 0) {
      in.params = Parameters{};
      in.dt = 1e-3;
    }
    const State state = fixtures::to_state(in);
    const SchemeConfig cfg = fixtures::to_config(in);
    const oracle::Step want = oracle::step(in);

    const auto total = step_total_density(state, cfg);
    CHECK(max_diff(total.rho, want.rho) < 1e-10);

    // partial and concentration solves are linear: feed them the oracle's
    // total density and compare at round-off level
    const Field rho_ref(state.grid(), want.rho);
    SolvedPartials solved;
    for (Species i : kAllSpecies) {
      Field r = step_partial_density(i, state, rho_ref, solved, cfg);
      CHECK(max_diff(r, want.rho_i[index(i)]) < 1e-12);
      solved[index(i)] = Field(state.grid(), want.rho_i[index(i)]);
    }
    const Field c = step_concentration(state, *solved[2], *solved[3], cfg);
    CHECK(max_diff(c, want.c_b) < 1e-12);
  }
}

TEST_CASE("partial density: zero stays zero, uniform stays uniform") {
  const Grid g(10);
  const Parameters p;
  State s(g);
  s.rho[1] = Field(g, 0.5);
  const SchemeConfig cfg(g, p, 0.1, 1e-3, 1e-3, {}, 1.0);
  // stem cells have no feeder, so zero is the solution
  const Field rs = step_partial_density(Species::s, s, s.total() + 0.1, {}, cfg);
  CHECK(linf(rs) == 0.0);

  const SchemeConfig still(g, no_rates(), 0.1, 1e-3, 1e-3, {}, 1.0);
  const State u = uniform_state(g, 0.3, 0.2);
  SolvedPartials solved;
  for (Species i : kAllSpecies) {
    const Field r = step_partial_density(i, u, u.total(), solved, still);
    for (std::size_t j = 0; j < 10; ++j) CHECK(r[j] == doctest::Approx(0.3).epsilon(1e-15));
    solved[index(i)] = r;
  }
}

TEST_CASE("partial density needs its feeder") {
  const Grid g(4);
  const State s = uniform_state(g, 0.2, 0.1);
  const SchemeConfig cfg(g, Parameters{}, 0.1, 1e-3, 1e-3, {}, 1.0);
  CHECK_THROWS_AS(step_partial_density(Species::p, s, s.total(), {}, cfg), ValidationError);
  SolvedPartials only_s;
  only_s[0] = s.rho[0];
  CHECK_THROWS_AS(step_partial_density(Species::e, s, s.total(), only_s, cfg), ValidationError);
}

TEST_CASE("concentration step") {
  const Grid g(16);
  const SchemeConfig cfg(g, Parameters{}, 0.1, 1e-3, 1e-3, {}, 1.0);
  const State empty(g);
  CHECK(linf(step_concentration(empty, Field(g), Field(g), cfg)) == 0.0);

  Parameters p;
  p.gamma = 0.0;
  const SchemeConfig heat(g, p, 0.1, 1e-2, 1e-2, {}, 1.0);
  State s(g);
  s.c_b = Field(g, 1.0);
  const Field c = step_concentration(s, Field(g), Field(g), heat);
  CHECK(c.max() <= 1.0);
  CHECK(c.min() >= 0.0);
  CHECK(c[15] < c[0]);
}

TEST_CASE("no rates: a uniform state is a fixed point") {
  const Grid g(9);
  const SchemeConfig cfg(g, no_rates(), 0.2, 1e-3, 1e-3, {}, 1.0);
  State s = uniform_state(g, 0.25, 0.0);
  const StepResult r = advance(s, cfg);
  for (Species i : kAllSpecies) {
    for (std::size_t j = 0; j < 9; ++j) CHECK(r.state[i][j] == doctest::Approx(0.25).epsilon(1e-15));
  }
  CHECK(r.report.consistency_defect < 1e-14);
  CHECK(r.state.t == doctest::Approx(1e-3));
}

TEST_CASE("default scenario: one step keeps the proven bounds") {
  const Grid g(200);
  const InitialData data = builtin_scenario("crypt-default").sample(g);
  const SchemeConfig cfg(g, Parameters{}, 0.01, 1e-3, 1e-3, {}, data.rho0_sup());
  const StepResult r = advance(regularize_initial(data, 0.01), cfg);
  CHECK(r.report.max_principle_ok);
  CHECK(r.report.energy_25_ok);
  CHECK(r.report.energy_27_ok);
  CHECK(r.report.nonnegativity_ok);
  CHECK(std::abs(r.report.mass_residual) < 1e-12);
  CHECK(r.report.hard_ok());
}

TEST_CASE("run: zero final time keeps only the initial state") {
  const Grid g(20);
  const InitialData data = builtin_scenario("uniform-mix").sample(g);
  const Trajectory t = run(data, SchemeConfig(g, Parameters{}, 0.1, 1e-3, 0.0));
  CHECK(t.ok());
  CHECK(t.snapshots.size() == 1);
  CHECK(t.reports.empty());
}

TEST_CASE("run: default scenario at eps = 0.1 completes without violations") {
  const Grid g(200);
  const InitialData data = builtin_scenario("crypt-default").sample(g);
  const Trajectory t = run(data, SchemeConfig(g, Parameters{}, 0.1, 1e-3, 1.0), {0.25, 0.5});
  REQUIRE(t.ok());
  CHECK(t.reports.size() == 1000);
  REQUIRE(t.snapshots.size() == 3);
  CHECK(t.snapshots[1].t == doctest::Approx(0.25));
  CHECK(t.snapshots[2].t == doctest::Approx(0.5));
  for (const auto& r : t.reports) CHECK(r.hard_ok());
}

TEST_CASE("run: mass is conserved without sources") {
  const Grid g(60);
  const InitialData data = builtin_scenario("crypt-default").sample(g);
  std::vector<double> masses;
  const Trajectory t =
      run(data, SchemeConfig(g, no_rates(), 0.05, 1e-3, 0.2), {},
          [&](const State& s, const StepReport&) { masses.push_back(integrate(s.total())); });
  REQUIRE(t.ok());
  const double m0 = integrate(t.snapshots.front().total());
  for (double m : masses) CHECK(std::abs(m - m0) < 1e-12);
}

TEST_CASE("run: strict mode stops on a failed bound, warn mode continues") {
  const Grid g(20);
  const InitialData data = builtin_scenario("crypt-default").sample(g);
  // picard_max = 1 cannot converge away from a fixed point
  SolverOptions starved;
  starved.picard_max = 1;
  const Trajectory t = run(data, SchemeConfig(g, Parameters{}, 0.1, 1e-3, 0.01, starved));
  CHECK(t.failure == FailureKind::solver);
  CHECK(t.reports.empty());
  CHECK(t.snapshots.size() == 1);
}

TEST_CASE("subtraction variant has no consistency defect") {
  const Grid g(40);
  const InitialData data = builtin_scenario("crypt-default").sample(g);
  SolverOptions opts;
  opts.subtract_g = true;
  opts.strict = false;
  const Trajectory t = run(data, SchemeConfig(g, Parameters{}, 0.05, 1e-3, 0.1, opts));
  REQUIRE(t.ok());
  REQUIRE(t.reports.size() == 100);
  for (const auto& r : t.reports) CHECK(r.consistency_defect < 1e-14);
  // rho_g inherits the mismatch between the two discretizations; the step
  // reports it instead of hiding it
  for (const auto& r : t.reports) CHECK(r.nonnegativity_ok == (r.min_partial >= -1e-12));
}

TEST_CASE("consistency defect without sources shrinks with dt") {
  // Advection of rho_i uses the new total density while the total-density
  // equation uses the old one, so the defect is O(dt) rather than zero.
  const Grid g(50);
  const InitialData data = builtin_scenario("crypt-default").sample(g);
  double prev = INFINITY;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    double worst = 0.0;
    const Trajectory t =
        run(data, SchemeConfig(g, no_rates(), 0.05, dt, 0.04), {},
            [&](const State&, const StepReport& r) { worst = std::max(worst, r.consistency_defect); });
    REQUIRE(t.ok());
    CHECK(worst > 0.0);
    CHECK(worst < prev);
    prev = worst;
  }
}

TEST_CASE("debug truncation is inactive at the solution") {
  const Grid g(50);
  const InitialData data = builtin_scenario("segregated-steps").sample(g);
  SolverOptions opts;
  opts.debug_truncation = true;
  const Trajectory t = run(data, SchemeConfig(g, Parameters{}, 0.05, 1e-3, 0.05, opts));
  REQUIRE(t.ok());
  for (const auto& r : t.reports) CHECK(r.truncation_delta < 1e-9);
}

TEST_CASE("fingerprint separates every knob") {
  const SchemeConfig base(Grid(10), Parameters{}, 0.1, 1e-3, 1.0);
  CHECK(fingerprint(base) == fingerprint(SchemeConfig(Grid(10), Parameters{}, 0.1, 1e-3, 1.0)));
  CHECK(fingerprint(base) != fingerprint(base.with_eps(0.2)));
  CHECK(fingerprint(base) != fingerprint(base.with_dt(2e-3)));
  CHECK(fingerprint(base) != fingerprint(base.with_grid(Grid(11))));
  Parameters p;
  p.Runder_p_g.kappa = 0.3;
  CHECK(fingerprint(base) != fingerprint(base.with_params(p)));
}

}  // TEST_SUITE
