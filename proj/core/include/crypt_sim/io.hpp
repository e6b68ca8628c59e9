#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crypt_sim/diagnostics.hpp"
#include "crypt_sim/experiments.hpp"
#include "crypt_sim/model.hpp"
#include "crypt_sim/state.hpp"

namespace crypt_sim {

/// Everything needed to reproduce one run from the command line.
struct RunConfig {
  std::string scenario = "crypt-default";
  double eps = 0.01;
  double dt = 1e-3;
  double t_end = 1.0;
  std::size_t n_cells = 200;
  Parameters params;
  SolverOptions options;
  std::string output_dir = "out";
  std::vector<double> snapshot_times;

  /// Throws ValidationError (through SchemeConfig) on inconsistent values.
  SchemeConfig scheme() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Line-oriented "key = value" text with optional [params] and [ramps]
/// sections; ramps are written as `R_div_s.K = 0.35`. '#' starts a comment.
/// dt defaults to default_dt(params) when absent. Unknown keys, bad numbers
/// and missing '=' raise ParseError; the result is validated as a whole and
/// may raise ValidationError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Every key with its effective value; parse_config(format_config(c)) == c.
std::string format_config(const RunConfig& cfg);

/// Columns x, rho_s, rho_p, rho_e, rho_g, rho, c_b with 17 significant digits.
void write_snapshot_csv(const State& state, const std::filesystem::path& path);
/// Inverse of write_snapshot_csv; the x and rho columns are checked, not stored.
State read_snapshot_csv(const std::filesystem::path& path);

/// One row per step with every StepReport field.
void write_reports_csv(std::span<const StepReport> reports, const std::filesystem::path& path);
std::vector<std::string> report_columns();

void write_table_csv(const ConvergenceTable& table, const std::filesystem::path& path);

/// 800x500 polyline chart of the four densities, their sum and c_b over x.
void write_profile_svg(const State& state, const std::filesystem::path& path,
                       std::string_view title = {});

}  // namespace crypt_sim
