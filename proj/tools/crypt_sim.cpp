// crypt-sim: command-line driver for the regularized crypt-cell scheme.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "crypt_sim/errors.hpp"
#include "crypt_sim/experiments.hpp"
#include "crypt_sim/io.hpp"
#include "crypt_sim/scheme.hpp"

namespace fs = std::filesystem;
using namespace crypt_sim;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kValidation = 2, kSolver = 3, kInvariant = 4 };

RunConfig load(const std::string& path) {
  return path.empty() ? parse_config("") : load_config(path);
}

int exit_for(const Trajectory& traj) {
  switch (traj.failure) {
    case FailureKind::none: return kOk;
    case FailureKind::solver: return kSolver;
    case FailureKind::invariant: return kInvariant;
  }
  return kSolver;
}

void print_table(const ConvergenceTable& t) {
  fmt::print("{:>12} {:>14} {:>8}\n", t.parameter, "error_" + t.quantity, "order");
  for (const auto& r : t.rows) {
    if (r.failed) {
      fmt::print("{:>12.6g} {:>14} {:>8}  {}\n", r.param, "failed", "-", r.message);
    } else {
      fmt::print("{:>12.6g} {:>14.6e} {:>8.3f}\n", r.param, r.error, r.order);
    }
  }
  fmt::print("fitted order {:.3f}\n\n", t.estimated_order());
}

int table_status(const std::vector<const ConvergenceTable*>& tables) {
  for (const auto* t : tables) {
    if (t->any_failed()) return kSolver;
  }
  return kOk;
}

int cmd_run(const RunConfig& rc) {
  const SchemeConfig cfg = rc.scheme();
  const Scenario sc = builtin_scenario(rc.scenario);
  const Trajectory traj = run(sc.sample(cfg.grid()), cfg, rc.snapshot_times);

  const fs::path dir = rc.output_dir;
  {
    const std::string text = format_config(rc);
    fs::create_directories(dir);
    std::FILE* f = std::fopen((dir / "config.cfg").c_str(), "w");
    if (!f) throw IoError((dir / "config.cfg").string(), "cannot open for writing");
    std::fputs(text.c_str(), f);
    std::fclose(f);
  }
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const State& s = traj.snapshots[k];
    const std::string stem = fmt::format("snapshot_{:03d}", k);
    write_snapshot_csv(s, dir / (stem + ".csv"));
    write_profile_svg(s, dir / (stem + ".svg"), fmt::format("{}  t = {:.4g}", rc.scenario, s.t));
  }
  write_reports_csv(traj.reports, dir / "reports.csv");

  for (const auto& w : traj.warnings) fmt::print(stderr, "warning: {}\n", w);
  fmt::print("{} steps, {} snapshots written to {}\n", traj.reports.size(), traj.snapshots.size(),
             dir.string());
  if (!traj.ok()) fmt::print(stderr, "error: {}\n", traj.error);
  return exit_for(traj);
}

int cmd_sweep_eps(const RunConfig& rc, std::vector<double> eps) {
  if (eps.empty()) eps = {0.1, 0.05, 0.025, 0.0125};
  const ConvergenceTable t = viscosity_sweep(builtin_scenario(rc.scenario), rc.scheme(), eps);
  print_table(t);
  fmt::print("strictly decreasing: {}\n", t.strictly_decreasing() ? "yes" : "no");
  write_table_csv(t, fs::path(rc.output_dir) / "sweep_eps.csv");
  return table_status({&t});
}

int cmd_refine_dt(const RunConfig& rc, std::vector<double> dts) {
  if (dts.empty()) {
    for (int k = 0; k <= 4; ++k) dts.push_back(rc.dt / (1 << k));
  }
  const RefinementStudy s = dt_refinement(builtin_scenario(rc.scenario), rc.scheme(), dts);
  print_table(s.rho);
  print_table(s.c_b);
  print_table(s.defect);
  const fs::path dir = rc.output_dir;
  write_table_csv(s.rho, dir / "refine_dt_rho.csv");
  write_table_csv(s.c_b, dir / "refine_dt_cb.csv");
  write_table_csv(s.defect, dir / "refine_dt_defect.csv");
  return table_status({&s.rho, &s.c_b, &s.defect});
}

int cmd_refine_grid(const RunConfig& rc, std::vector<std::size_t> ns) {
  if (ns.empty()) ns = {25, 50, 100, 200, 400};
  const RefinementStudy s = grid_refinement(builtin_scenario(rc.scenario), rc.scheme(), ns);
  print_table(s.rho);
  print_table(s.c_b);
  const fs::path dir = rc.output_dir;
  write_table_csv(s.rho, dir / "refine_grid_rho.csv");
  write_table_csv(s.c_b, dir / "refine_grid_cb.csv");
  return table_status({&s.rho, &s.c_b});
}

struct CheckRow {
  std::string scenario;
  std::size_t steps = 0;
  int max_principle = 0, nonnegativity = 0, e25 = 0, e27 = 0, mass = 0, e26 = 0;
  bool gradient_ok = true;
  std::string error;

  int hard() const { return max_principle + nonnegativity + e25 + e27 + mass; }
};

int cmd_check(const RunConfig& rc, std::optional<double> t_end) {
  SolverOptions opts = rc.options;
  opts.strict = false;
  SchemeConfig base = rc.scheme().with_options(opts);
  if (t_end) base = base.with_t_end(*t_end);

  std::vector<CheckRow> rows;
  for (const auto& name : builtin_scenario_names()) {
    CheckRow row;
    row.scenario = name;
    const InitialData data = builtin_scenario(name).sample(base.grid());
    const Trajectory traj = run(data, base);
    for (const auto& r : traj.reports) {
      row.max_principle += !r.max_principle_ok;
      row.nonnegativity += !r.nonnegativity_ok;
      row.e25 += !r.energy_25_ok;
      row.e27 += !r.energy_27_ok;
      row.mass += !r.mass_ok;
      row.e26 += !r.energy_26_ok;
    }
    row.steps = traj.reports.size();
    const SchemeConfig used = base.with_rho0_sup(std::max(base.rho0_sup(), data.rho0_sup()));
    row.gradient_ok = gradient_bound_check(traj.snapshots, used).ok;
    if (!traj.ok()) row.error = traj.error;
    rows.push_back(std::move(row));
  }

  fmt::print("{:<20} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>8} {:>6}  {}\n", "scenario", "steps",
             "maxpr", "nonneg", "E25", "E27", "mass", "E26(mon)", "grad", "status");
  int status = kOk;
  for (const auto& r : rows) {
    const bool bad = r.hard() > 0 || !r.error.empty();
    fmt::print("{:<20} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>8} {:>6}  {}\n", r.scenario, r.steps,
               r.max_principle, r.nonnegativity, r.e25, r.e27, r.mass, r.e26,
               r.gradient_ok ? "ok" : "over", bad ? (r.error.empty() ? "FAIL" : r.error) : "ok");
    if (!r.error.empty()) status = std::max<int>(status, kSolver);
    if (r.hard() > 0 && rc.options.strict) status = kInvariant;
  }
  int total = 0;
  for (const auto& r : rows) total += r.hard();
  fmt::print("hard-invariant failures: {}\n", total);
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized crypt-cell cross-diffusion simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> output_dir;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "Configuration file")->check(CLI::ExistingFile);
    sub->add_option("-o,--output-dir", output_dir, "Override output_dir");
  };

  auto* run_cmd = app.add_subcommand("run", "Simulate one scenario and write snapshots and reports");
  add_common(run_cmd);

  std::vector<double> eps_list;
  auto* sweep_cmd = app.add_subcommand("sweep-eps", "Vanishing-viscosity Cauchy sweep");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--eps", eps_list, "Viscosities, strictly monotone")->delimiter(',');

  std::vector<double> dt_list;
  auto* dt_cmd = app.add_subcommand("refine-dt", "Time-step refinement; last dt is the reference");
  add_common(dt_cmd);
  dt_cmd->add_option("--dt", dt_list, "Time steps, strictly decreasing")->delimiter(',');

  std::vector<std::size_t> n_list;
  auto* grid_cmd = app.add_subcommand("refine-grid", "Grid refinement; last N is the reference");
  add_common(grid_cmd);
  grid_cmd->add_option("--cells", n_list, "Cell counts, strictly increasing")->delimiter(',');

  std::optional<double> check_t_end;
  auto* check_cmd = app.add_subcommand("check", "Invariant suite on every built-in scenario");
  add_common(check_cmd);
  check_cmd->add_option("--t-end", check_t_end, "Override the final time");

  auto* print_cmd = app.add_subcommand("print-config", "Print the effective configuration");
  add_common(print_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    RunConfig rc = load(config_path);
    if (output_dir) rc.output_dir = *output_dir;

    if (*run_cmd) return cmd_run(rc);
    if (*sweep_cmd) return cmd_sweep_eps(rc, eps_list);
    if (*dt_cmd) return cmd_refine_dt(rc, dt_list);
    if (*grid_cmd) return cmd_refine_grid(rc, n_list);
    if (*check_cmd) return cmd_check(rc, check_t_end);
    if (*print_cmd) {
      fmt::print("{}", format_config(rc));
      return kOk;
    }
  } catch (const ParseError& e) {
    fmt::print(stderr, "parse error: {}\n", e.what());
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    fmt::print(stderr, "io error: {}\n", e.what());
    return kUsage;
  } catch (const IoError& e) {
    fmt::print(stderr, "io error: {}\n", e.what());
    return kUsage;
  } catch (const ValidationError& e) {
    fmt::print(stderr, "invalid configuration: {}\n", e.what());
    return kValidation;
  } catch (const UnknownScenario& e) {
    fmt::print(stderr, "invalid configuration: {}\n", e.what());
    return kValidation;
  } catch (const InvariantViolation& e) {
    fmt::print(stderr, "invariant violated: {}\n", e.what());
    return kInvariant;
  } catch (const Error& e) {
    fmt::print(stderr, "solver failure: {}\n", e.what());
    return kSolver;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kSolver;
  }
  return kUsage;
}
