#include "crypt_sim/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "crypt_sim/errors.hpp"

namespace crypt_sim {

SchemeConfig RunConfig::scheme() const {
  SchemeConfig cfg(Grid(n_cells), params, eps, dt, t_end, options);
  (void)cfg.step_count();
  for (double t : snapshot_times) {
    if (!(t >= 0.0 && t <= t_end)) {
      throw ValidationError(fmt::format("snapshot time {} outside [0, t_end = {}]", t, t_end));
    }
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// config text

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Cursor {
  std::size_t line;
  std::size_t column;  // 1-based column of the value
};

double parse_double(std::string_view v, Cursor at) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty()) {
    throw ParseError(at.line, at.column, fmt::format("expected a number, got '{}'", v));
  }
  if (!std::isfinite(out)) throw ParseError(at.line, at.column, "number must be finite");
  return out;
}

long long parse_integer(std::string_view v, Cursor at) {
  long long out = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty()) {
    throw ParseError(at.line, at.column, fmt::format("expected an integer, got '{}'", v));
  }
  return out;
}

bool parse_bool(std::string_view v, Cursor at) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ParseError(at.line, at.column, fmt::format("expected true or false, got '{}'", v));
}

std::string parse_string(std::string_view v, Cursor at) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  if (v.empty()) throw ParseError(at.line, at.column, "empty value");
  return std::string(v);
}

std::vector<double> parse_list(std::string_view v, Cursor at) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  std::size_t offset = 0;
  while (offset <= v.size()) {
    const auto comma = v.find(',', offset);
    const auto piece = v.substr(offset, comma == std::string_view::npos ? v.npos : comma - offset);
    const auto item = trim(piece);
    const std::size_t lead = piece.find_first_not_of(" \t");
    out.push_back(parse_double(item, {at.line, at.column + offset + (lead == piece.npos ? 0 : lead)}));
    if (comma == std::string_view::npos) break;
    offset = comma + 1;
  }
  return out;
}

enum class Section { top, params, ramps };

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  bool dt_given = false;
  Section section = Section::top;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const std::size_t indent = raw.find_first_not_of(" \t") + 1;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, indent, "unterminated section header");
      const auto name = trim(line.substr(1, line.size() - 2));
      if (name == "params") {
        section = Section::params;
      } else if (name == "ramps") {
        section = Section::ramps;
      } else {
        throw ParseError(line_no, indent + 1, fmt::format("unknown section [{}]", name));
      }
      continue;
    }

    const auto eq = raw.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, indent, "expected 'key = value'");
    const std::string_view key = trim(raw.substr(0, eq));
    const std::string_view rest = raw.substr(eq + 1);
    const std::string_view value = trim(rest);
    const std::size_t value_col = eq + 2 + (rest.find_first_not_of(" \t") == rest.npos
                                                ? 0
                                                : rest.find_first_not_of(" \t"));
    const Cursor at{line_no, value_col};
    if (key.empty()) throw ParseError(line_no, indent, "missing key");
    auto unknown = [&] {
      return ParseError(line_no, indent, fmt::format("unknown key '{}'", key));
    };

    switch (section) {
      case Section::top:
        if (key == "scenario") {
          cfg.scenario = parse_string(value, at);
        } else if (key == "eps") {
          cfg.eps = parse_double(value, at);
        } else if (key == "dt") {
          cfg.dt = parse_double(value, at);
          dt_given = true;
        } else if (key == "t_end") {
          cfg.t_end = parse_double(value, at);
        } else if (key == "n_cells") {
          const long long n = parse_integer(value, at);
          if (n < 2) throw ParseError(at.line, at.column, "n_cells must be at least 2");
          cfg.n_cells = static_cast<std::size_t>(n);
        } else if (key == "picard_tol") {
          cfg.options.picard_tol = parse_double(value, at);
        } else if (key == "picard_max") {
          cfg.options.picard_max = static_cast<int>(parse_integer(value, at));
        } else if (key == "subtract_g") {
          cfg.options.subtract_g = parse_bool(value, at);
        } else if (key == "debug_truncation") {
          cfg.options.debug_truncation = parse_bool(value, at);
        } else if (key == "strict") {
          cfg.options.strict = parse_bool(value, at);
        } else if (key == "output_dir") {
          cfg.output_dir = parse_string(value, at);
        } else if (key == "snapshot_times") {
          cfg.snapshot_times = parse_list(value, at);
        } else {
          throw unknown();
        }
        break;
      case Section::params: {
        const auto& fields = scalar_parameter_fields();
        const auto it = std::find_if(fields.begin(), fields.end(),
                                     [&](const RateField& f) { return f.name == key; });
        if (it == fields.end()) throw unknown();
        cfg.params.*(it->member) = parse_double(value, at);
        break;
      }
      case Section::ramps: {
        const auto dot = key.rfind('.');
        if (dot == std::string_view::npos) throw unknown();
        const auto ramp = key.substr(0, dot);
        const auto part = key.substr(dot + 1);
        const auto& fields = ramp_parameter_fields();
        const auto it = std::find_if(fields.begin(), fields.end(),
                                     [&](const RampField& f) { return f.name == ramp; });
        if (it == fields.end() || (part != "K" && part != "kappa")) throw unknown();
        RampSpec& spec = cfg.params.*(it->member);
        (part == "K" ? spec.K : spec.kappa) = parse_double(value, at);
        break;
      }
    }
  }

  cfg.params.validate();
  if (!dt_given) cfg.dt = default_dt(cfg.params);
  (void)builtin_scenario(cfg.scenario);
  (void)cfg.scheme();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string format_config(const RunConfig& cfg) {
  std::string out;
  auto line = [&](std::string_view key, const auto& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  line("scenario", cfg.scenario);
  line("eps", cfg.eps);
  line("dt", cfg.dt);
  line("t_end", cfg.t_end);
  line("n_cells", cfg.n_cells);
  line("picard_tol", cfg.options.picard_tol);
  line("picard_max", cfg.options.picard_max);
  line("subtract_g", cfg.options.subtract_g);
  line("debug_truncation", cfg.options.debug_truncation);
  line("strict", cfg.options.strict);
  line("output_dir", cfg.output_dir);
  std::string times;
  for (std::size_t k = 0; k < cfg.snapshot_times.size(); ++k) {
    times += fmt::format("{}{}", k ? ", " : "", cfg.snapshot_times[k]);
  }
  line("snapshot_times", times);

  out += "\n[params]\n";
  for (const auto& f : scalar_parameter_fields()) line(f.name, cfg.params.*(f.member));
  out += "\n[ramps]\n";
  for (const auto& f : ramp_parameter_fields()) {
    const RampSpec& r = cfg.params.*(f.member);
    line(fmt::format("{}.K", f.name), r.K);
    line(fmt::format("{}.kappa", f.name), r.kappa);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path.string(), ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

void write_snapshot_csv(const State& state, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "x,rho_s,rho_p,rho_e,rho_g,rho,c_b\n";
  const Grid& grid = state.grid();
  const Field rho = state.total();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    out << num(grid.center(j)) << ',' << num(state.rho[0][j]) << ',' << num(state.rho[1][j]) << ','
        << num(state.rho[2][j]) << ',' << num(state.rho[3][j]) << ',' << num(rho[j]) << ','
        << num(state.c_b[j]) << '\n';
  }
  finish(out, path);
}

State read_snapshot_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::string header;
  std::getline(in, header);
  if (trim(header) != "x,rho_s,rho_p,rho_e,rho_g,rho,c_b") {
    throw ParseError(1, 1, fmt::format("{}: unexpected header", path.string()));
  }
  std::vector<std::array<double, 7>> rows;
  std::string text;
  std::size_t line_no = 1;
  while (std::getline(in, text)) {
    ++line_no;
    if (trim(text).empty()) continue;
    std::array<double, 7> row{};
    std::size_t offset = 0;
    for (std::size_t k = 0; k < 7; ++k) {
      const auto comma = text.find(',', offset);
      if ((comma == std::string::npos) != (k == 6)) {
        throw ParseError(line_no, offset + 1, fmt::format("{}: expected 7 columns", path.string()));
      }
      const std::string_view cell =
          trim(std::string_view(text).substr(offset, comma == std::string::npos ? std::string::npos
                                                                                 : comma - offset));
      row[k] = parse_double(cell, {line_no, offset + 1});
      offset = comma + 1;
    }
    rows.push_back(row);
  }
  const Grid grid(rows.size());
  State state(grid);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t i = 0; i < 4; ++i) state.rho[i][j] = rows[j][i + 1];
    state.c_b[j] = rows[j][6];
  }
  return state;
}

std::vector<std::string> report_columns() {
  std::vector<std::string> cols{"step", "t", "picard_iters", "min_rho", "max_rho", "min_partial",
                                "min_cb", "energy_25_lhs", "energy_25_rhs"};
  for (Species i : kAllSpecies) cols.push_back(fmt::format("energy_26_margin_{}", name(i)));
  for (Species i : kAllSpecies) cols.push_back(fmt::format("energy_26_rhs_{}", name(i)));
  cols.insert(cols.end(), {"energy_27_lhs", "energy_27_rhs"});
  for (Species i : kAllSpecies) cols.push_back(fmt::format("tv_w_{}", name(i)));
  cols.insert(cols.end(), {"grad_rho_l2_sq", "grad_cb_l2_sq", "consistency_defect",
                           "mass_residual", "truncation_delta", "max_principle_ok",
                           "nonnegativity_ok", "energy_25_ok", "energy_26_ok", "energy_27_ok",
                           "mass_ok"});
  return cols;
}

void write_reports_csv(std::span<const StepReport> reports, const std::filesystem::path& path) {
  auto out = open_out(path);
  const auto cols = report_columns();
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << '\n';
  for (const StepReport& r : reports) {
    std::vector<std::string> cells{std::to_string(r.step), num(r.t), std::to_string(r.picard_iters),
                                   num(r.min_rho), num(r.max_rho), num(r.min_partial),
                                   num(r.min_cb), num(r.energy_25_lhs), num(r.energy_25_rhs)};
    for (double v : r.energy_26_margin) cells.push_back(num(v));
    for (double v : r.energy_26_rhs) cells.push_back(num(v));
    cells.push_back(num(r.energy_27_lhs));
    cells.push_back(num(r.energy_27_rhs));
    for (double v : r.tv_w) cells.push_back(num(v));
    for (double v : {r.grad_rho_l2_sq, r.grad_cb_l2_sq, r.consistency_defect, r.mass_residual,
                     r.truncation_delta}) {
      cells.push_back(num(v));
    }
    for (bool b : {r.max_principle_ok, r.nonnegativity_ok, r.energy_25_ok, r.energy_26_ok,
                   r.energy_27_ok, r.mass_ok}) {
      cells.push_back(b ? "1" : "0");
    }
    for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
    out << '\n';
  }
  finish(out, path);
}

void write_table_csv(const ConvergenceTable& table, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << table.parameter << ",error_" << table.quantity << ",order,failed,message\n";
  for (const auto& r : table.rows) {
    std::string msg = r.message;
    std::replace(msg.begin(), msg.end(), '"', '\'');
    out << num(r.param) << ',' << num(r.error) << ',' << num(r.order) << ',' << (r.failed ? 1 : 0)
        << ",\"" << msg << "\"\n";
  }
  finish(out, path);
}

// ---------------------------------------------------------------------------
// SVG

void write_profile_svg(const State& state, const std::filesystem::path& path,
                       std::string_view title) {
  constexpr double kWidth = 800, kHeight = 500;
  constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  struct Series {
    std::string_view label;
    const Field* field;
    std::string_view color;
  };
  const std::array<Series, 5> series{{{"rho_s", &state.rho[0], "#1f77b4"},
                                      {"rho_p", &state.rho[1], "#ff7f0e"},
                                      {"rho_e", &state.rho[2], "#2ca02c"},
                                      {"rho_g", &state.rho[3], "#d62728"},
                                      {"c_b", &state.c_b, "#9467bd"}}};

  double y_max = 0.0;
  for (const auto& s : series) y_max = std::max(y_max, s.field->max());
  y_max = y_max > 0.0 ? 1.05 * y_max : 1.0;
  auto px = [&](double x) { return kLeft + x * plot_w; };
  auto py = [&](double y) { return kTop + plot_h * (1.0 - y / y_max); };

  std::string svg;
  svg += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, kHeight);
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    svg += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                       kLeft + plot_w / 2, title);
  }
  svg += fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft,
      kTop, plot_w, plot_h);
  for (int k = 0; k <= 5; ++k) {
    const double x = k / 5.0;
    const double y = y_max * k / 5.0;
    svg += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>"
        "<text x=\"{0:.2f}\" y=\"{3:.2f}\" text-anchor=\"middle\">{4:.1f}</text>\n",
        px(x), kTop + plot_h, kTop + plot_h + 5, kTop + plot_h + 20, x);
    svg += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"black\"/>"
        "<text x=\"{3:.2f}\" y=\"{4:.2f}\" text-anchor=\"end\">{5:.3g}</text>\n",
        kLeft - 5, py(y), kLeft, kLeft - 8, py(y) + 4, y);
  }
  svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">x</text>\n",
                     kLeft + plot_w / 2, kHeight - 10);

  const Grid& grid = state.grid();
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::string points;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      points += fmt::format("{}{:.2f},{:.2f}", j ? " " : "", px(grid.center(j)), py((*s.field)[j]));
    }
    svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                       s.color, points);
    const double ly = kTop + 15 + 20.0 * static_cast<double>(k);
    svg += fmt::format(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>"
        "<text x=\"{4}\" y=\"{5}\">{6}</text>\n",
        kWidth - kRight + 15, ly, kWidth - kRight + 40, s.color, kWidth - kRight + 45, ly + 4,
        s.label);
  }
  svg += "</svg>\n";

  auto out = open_out(path);
  out << svg;
  finish(out, path);
}

}  // namespace crypt_sim
