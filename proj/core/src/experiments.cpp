#include "crypt_sim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "crypt_sim/errors.hpp"

namespace crypt_sim {

// ---------------------------------------------------------------------------
// Scenarios

InitialData Scenario::sample(const Grid& grid) const {
  constexpr int kSub = 16;
  const double dx = grid.dx();
  auto average = [&](const std::function<double(double)>& f, std::size_t j) {
    const double left = static_cast<double>(j) * dx;
    double s = 0.0;
    for (int k = 0; k < kSub; ++k) s += f(left + (k + 0.5) * dx / kSub);
    return s / kSub;
  };
  auto fill = [&](const std::function<double(double)>& f, std::string_view what) {
    Field out(grid);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      out[j] = average(f, j);
      if (!std::isfinite(out[j]) || out[j] < 0.0) {
        throw ValidationError(fmt::format("scenario {}: {} is negative or not finite in cell {}",
                                          name, what, j));
      }
    }
    return out;
  };
  if (c_b0(1.0) != 0.0) {
    throw ValidationError(fmt::format("scenario {}: c_b0(1) = {} must vanish", name, c_b0(1.0)));
  }
  return InitialData{{fill(rho0[0], "rho_s0"), fill(rho0[1], "rho_p0"), fill(rho0[2], "rho_e0"),
                      fill(rho0[3], "rho_g0")},
                     fill(c_b0, "c_b0")};
}

namespace {

double bump(double x, double center, double width) {
  const double z = (x - center) / width;
  return std::exp(-z * z);
}

double linear_profile(double x) { return 0.5 * (1.0 - x); }

}  // namespace

std::vector<std::string> builtin_scenario_names() {
  return {"crypt-default", "segregated-steps", "uniform-mix", "vacuum-bottom-only"};
}

Scenario builtin_scenario(std::string_view name) {
  Scenario sc;
  sc.name = std::string(name);
  if (name == "crypt-default") {
    // stem cells at the bottom, progenitors in the middle, differentiated cells near the top
    sc.rho0 = {[](double x) { return 0.8 * bump(x, 0.0, 0.12); },
               [](double x) { return 0.6 * bump(x, 0.5, 0.12); },
               [](double x) { return 0.3 * bump(x, 0.85, 0.1); },
               [](double x) { return 0.2 * bump(x, 0.85, 0.1); }};
    sc.c_b0 = linear_profile;
  } else if (name == "segregated-steps") {
    // total density 1; one species per quarter, three interfaces
    auto quarter = [](int q) {
      return [q](double x) {
        const int at = std::min(3, static_cast<int>(std::floor(4.0 * x)));
        return at == q ? 1.0 : 0.0;
      };
    };
    sc.rho0 = {quarter(0), quarter(1), quarter(2), quarter(3)};
    sc.c_b0 = linear_profile;
  } else if (name == "uniform-mix") {
    auto quarter = [](double) { return 0.25; };
    sc.rho0 = {quarter, quarter, quarter, quarter};
    sc.c_b0 = linear_profile;
  } else if (name == "vacuum-bottom-only") {
    // compactly supported stem cells, empty crypt elsewhere
    sc.rho0 = {[](double x) {
                 if (x >= 0.3) return 0.0;
                 const double z = 1.0 - (x / 0.3) * (x / 0.3);
                 return 0.8 * z * z;
               },
               [](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
    sc.c_b0 = [](double) { return 0.0; };
  } else {
    throw UnknownScenario(std::string(name));
  }
  return sc;
}

// ---------------------------------------------------------------------------
// Convergence tables

void ConvergenceTable::add(double param, double error) {
  ConvergenceRow row;
  row.param = param;
  row.error = error;
  row.order = std::numeric_limits<double>::quiet_NaN();
  if (!rows.empty() && !rows.back().failed) {
    const auto& prev = rows.back();
    row.order = std::log(prev.error / error) / std::log(prev.param / param);
  }
  rows.push_back(std::move(row));
}

void ConvergenceTable::add_failure(double param, std::string message) {
  ConvergenceRow row;
  row.param = param;
  row.error = std::numeric_limits<double>::quiet_NaN();
  row.order = std::numeric_limits<double>::quiet_NaN();
  row.failed = true;
  row.message = std::move(message);
  rows.push_back(std::move(row));
}

double ConvergenceTable::estimated_order() const {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& r : rows) {
    if (r.failed || !(r.error > 0.0) || !(r.param > 0.0)) continue;
    const double x = std::log(r.param);
    const double y = std::log(r.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double ConvergenceTable::min_order() const {
  double m = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& r : rows) {
    if (std::isnan(r.order)) continue;
    m = std::min(m, r.order);
    any = true;
  }
  return any ? m : std::numeric_limits<double>::quiet_NaN();
}

bool ConvergenceTable::strictly_decreasing() const {
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k].failed || rows[k - 1].failed) return false;
    if (!(rows[k].error < rows[k - 1].error)) return false;
  }
  return true;
}

bool ConvergenceTable::any_failed() const {
  return std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.failed; });
}

// ---------------------------------------------------------------------------
// Sweeps

std::size_t sweep_threads() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CRYPT_SIM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) n = static_cast<std::size_t>(v);
  }
  return n;
}

namespace {

/// Runs job(k) for k in [0, count) on up to sweep_threads() workers.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& job) {
  const std::size_t workers = std::min(count, sweep_threads());
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) job(k);
    return;
  }
  std::mutex mutex;
  std::size_t next = 0;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      std::size_t k;
      {
        std::lock_guard lock(mutex);
        if (next >= count || first_error) return;
        k = next++;
      }
      try {
        job(k);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  pool.clear();
  if (first_error) std::rethrow_exception(first_error);
}

struct SweepRun {
  Trajectory traj;
  std::vector<Field> totals;  // total density after each step
};

void check_same_fingerprint(const std::vector<SchemeConfig>& neutralized, const SchemeConfig& base) {
  const std::size_t ref = fingerprint(base);
  for (const auto& c : neutralized) {
    if (fingerprint(c) != ref) throw ValidationError("sweep rows differ in more than the swept knob");
  }
}

bool strictly_monotone(const std::vector<double>& v) {
  if (v.size() < 2) return true;
  const bool down = v[1] < v[0];
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (down ? !(v[k] < v[k - 1]) : !(v[k] > v[k - 1])) return false;
  }
  return true;
}

}  // namespace

ConvergenceTable viscosity_sweep(const Scenario& scenario, const SchemeConfig& base,
                                 const std::vector<double>& eps_list) {
  if (!strictly_monotone(eps_list)) throw ValidationError("eps_list must be strictly monotone");
  std::vector<SchemeConfig> cfgs;
  std::vector<SchemeConfig> neutralized;
  for (double e : eps_list) {
    cfgs.push_back(base.with_eps(e));
    neutralized.push_back(cfgs.back().with_eps(base.eps()));
  }
  check_same_fingerprint(neutralized, base);

  const InitialData data = scenario.sample(base.grid());
  std::vector<SweepRun> runs(cfgs.size());
  parallel_for(cfgs.size(), [&](std::size_t k) {
    auto& out = runs[k];
    out.traj = run(data, cfgs[k], {}, [&](const State& s, const StepReport&) {
      out.totals.push_back(s.total());
    });
  });

  ConvergenceTable table{"eps", "rho", {}};
  for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
    const auto& a = runs[k];
    const auto& b = runs[k + 1];
    if (!a.traj.ok() || !b.traj.ok()) {
      table.add_failure(eps_list[k], !a.traj.ok() ? a.traj.error : b.traj.error);
      continue;
    }
    double sum = 0.0;
    for (std::size_t n = 0; n < a.totals.size(); ++n) sum += l2_norm_sq(a.totals[n] - b.totals[n]);
    table.add(eps_list[k], std::sqrt(base.dt() * sum));
  }
  return table;
}

RefinementStudy dt_refinement(const Scenario& scenario, const SchemeConfig& base,
                              const std::vector<double>& dt_list) {
  for (std::size_t k = 1; k < dt_list.size(); ++k) {
    if (!(dt_list[k] < dt_list[k - 1])) throw ValidationError("dt_list must be strictly decreasing");
  }
  std::vector<SchemeConfig> cfgs;
  std::vector<SchemeConfig> neutralized;
  for (double dt : dt_list) {
    cfgs.push_back(base.with_dt(dt));
    neutralized.push_back(cfgs.back().with_dt(base.dt()));
  }
  check_same_fingerprint(neutralized, base);

  const InitialData data = scenario.sample(base.grid());
  std::vector<Trajectory> runs(cfgs.size());
  parallel_for(cfgs.size(), [&](std::size_t k) { runs[k] = run(data, cfgs[k]); });

  RefinementStudy study{{"dt", "rho", {}}, {"dt", "c_b", {}}, {"dt", "defect", {}}};
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& r = runs[k];
    if (!r.ok()) {
      study.defect.add_failure(dt_list[k], r.error);
      continue;
    }
    double worst = 0.0;
    for (const auto& rep : r.reports) worst = std::max(worst, rep.consistency_defect);
    study.defect.add(dt_list[k], worst);
  }
  if (runs.empty()) return study;
  const Trajectory& ref = runs.back();
  for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
    const auto& r = runs[k];
    if (!r.ok() || !ref.ok()) {
      const std::string& msg = !r.ok() ? r.error : ref.error;
      study.rho.add_failure(dt_list[k], msg);
      study.c_b.add_failure(dt_list[k], msg);
      continue;
    }
    const State& a = r.snapshots.back();
    const State& b = ref.snapshots.back();
    study.rho.add(dt_list[k], std::sqrt(l2_norm_sq(a.total() - b.total())));
    study.c_b.add(dt_list[k], std::sqrt(l2_norm_sq(a.c_b - b.c_b)));
  }
  return study;
}

Field restrict_to(const Field& fine, const Grid& coarse) {
  const std::size_t nf = fine.size();
  const std::size_t nc = coarse.size();
  if (nf % nc != 0) {
    throw ValidationError(fmt::format("cannot restrict {} cells onto {} cells", nf, nc));
  }
  const std::size_t r = nf / nc;
  Field out(coarse);
  for (std::size_t j = 0; j < nc; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < r; ++k) s += fine[j * r + k];
    out[j] = s / static_cast<double>(r);
  }
  return out;
}

RefinementStudy grid_refinement(const Scenario& scenario, const SchemeConfig& base,
                                const std::vector<std::size_t>& n_list) {
  for (std::size_t k = 1; k < n_list.size(); ++k) {
    if (!(n_list[k] > n_list[k - 1])) throw ValidationError("n_list must be strictly increasing");
  }
  if (!n_list.empty()) {
    for (std::size_t n : n_list) {
      if (n_list.back() % n != 0) {
        throw ValidationError(fmt::format("reference grid {} is not a multiple of {}", n_list.back(), n));
      }
    }
  }
  std::vector<SchemeConfig> cfgs;
  std::vector<SchemeConfig> neutralized;
  for (std::size_t n : n_list) {
    cfgs.push_back(base.with_grid(Grid(n)));
    neutralized.push_back(cfgs.back().with_grid(base.grid()));
  }
  check_same_fingerprint(neutralized, base);

  std::vector<Trajectory> runs(cfgs.size());
  parallel_for(cfgs.size(), [&](std::size_t k) {
    runs[k] = run(scenario.sample(cfgs[k].grid()), cfgs[k]);
  });

  auto h = [&](std::size_t k) { return 1.0 / static_cast<double>(n_list[k]); };
  RefinementStudy study{{"dx", "rho", {}}, {"dx", "c_b", {}}, {"dx", "defect", {}}};
  for (std::size_t k = 0; k < runs.size(); ++k) {
    if (!runs[k].ok()) {
      study.defect.add_failure(h(k), runs[k].error);
      continue;
    }
    double worst = 0.0;
    for (const auto& rep : runs[k].reports) worst = std::max(worst, rep.consistency_defect);
    study.defect.add(h(k), worst);
  }
  if (runs.empty()) return study;
  const Trajectory& ref = runs.back();
  for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
    if (!runs[k].ok() || !ref.ok()) {
      const std::string& msg = !runs[k].ok() ? runs[k].error : ref.error;
      study.rho.add_failure(h(k), msg);
      study.c_b.add_failure(h(k), msg);
      continue;
    }
    const State& a = runs[k].snapshots.back();
    const State& b = ref.snapshots.back();
    const Grid& coarse = a.grid();
    study.rho.add(h(k), std::sqrt(l2_norm_sq(a.total() - restrict_to(b.total(), coarse))));
    study.c_b.add(h(k), std::sqrt(l2_norm_sq(a.c_b - restrict_to(b.c_b, coarse))));
  }
  return study;
}

}  // namespace crypt_sim
