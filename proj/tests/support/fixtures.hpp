#pragma once

#include <algorithm>
#include <random>

#include "crypt_sim/scheme.hpp"
#include "dense_oracle.hpp"

namespace fixtures {

/// Random admissible step input: partial densities in [eps/4, eps/4 + 0.6],
/// c_b in [0, 1], random eps, rates in [0, 2] and dt with q_inf dt < 1.
/// With `contractive` the step is also short enough that the lagged source
/// is a contraction (Lipschitz constant <= 1/2); otherwise the fixed point
/// iteration may legitimately fail to converge.
inline oracle::Input random_input(std::mt19937_64& rng, std::size_t n, bool contractive = true) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  oracle::Input in;
  in.eps = 0.01 + 0.3 * unit(rng);
  for (auto& r : in.rho_i) {
    r.resize(n);
    for (double& v : r) v = 0.25 * in.eps + 0.6 * unit(rng);
  }
  in.c_b.resize(n);
  for (double& v : in.c_b) v = unit(rng);
  for (const auto& f : crypt_sim::scalar_parameter_fields()) {
    if (f.name.starts_with("q_")) in.params.*(f.member) = 2.0 * unit(rng);
  }
  in.params.q_div_s = std::max(in.params.q_div_s, 0.1);
  in.params.sigma_b = 0.1 + 2.0 * unit(rng);
  in.params.gamma = 0.1 + 2.0 * unit(rng);
  in.dt = (0.05 + 0.9 * unit(rng)) / crypt_sim::q_inf(in.params);
  if (contractive) {
    // sup |df/drho| over the drawn states: each density ramp factor multiplies one density
    const auto& p = in.params;
    const double dens = 0.25 * in.eps + 0.6;
    const double lip = dens * p.max_ramp_lipschitz() * (p.q_div_s + p.q_div_p + p.q_ex_e + p.q_ex_g);
    in.dt = std::min(in.dt, (0.05 + 0.45 * unit(rng)) / lip);
  }
  return in;
}

inline crypt_sim::State to_state(const oracle::Input& in) {
  const crypt_sim::Grid grid(in.c_b.size());
  return crypt_sim::State({crypt_sim::Field(grid, in.rho_i[0]), crypt_sim::Field(grid, in.rho_i[1]),
                           crypt_sim::Field(grid, in.rho_i[2]), crypt_sim::Field(grid, in.rho_i[3])},
                          crypt_sim::Field(grid, in.c_b));
}

/// Configuration whose upper bound M covers the random state.
inline crypt_sim::SchemeConfig to_config(const oracle::Input& in) {
  const crypt_sim::State s = to_state(in);
  return crypt_sim::SchemeConfig(s.grid(), in.params, in.eps, in.dt, in.dt, {},
                                 s.total().max());
}

}  // namespace fixtures
