#include "dense_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracle {

double ramp_expanded(double K, double k, double y) {
  if (y <= K - k) return 0.0;
  if (y >= K + k) return 1.0;
  const double k3 = 4.0 * k * k * k;
  return -y * y * y / k3 + 3.0 * K * y * y / k3 - (3.0 * K * K - 3.0 * k * k) * y / k3 +
         (K * K * K + 2.0 * k * k * k - 3.0 * K * k * k) / k3;
}

namespace {

double R(const crypt_sim::RampSpec& r, double y) { return ramp_expanded(r.K, r.kappa, y); }

struct Rates {
  double self = 0.0;
  double gain = 0.0;
};

// f_i = self * rho_i + gain * rho_feeder, coefficients read off the model by hand
std::array<Rates, 4> rates(const crypt_sim::Parameters& p, double x, double rho, double c) {
  std::array<Rates, 4> r;
  r[0].self = p.q_div_s * (1 - R(p.R_div_s, x)) * (1 - R(p.Rbar_div_s, rho)) *
                  (1 - R(p.Runder_div_s, c)) -
              p.q_s_p * R(p.R_s_p, x);
  r[1].self = p.q_div_p * (1 - R(p.R_div_p, x)) * (1 - R(p.Rbar_div_p, rho)) -
              p.q_p_e * R(p.R_p_e, x) * R(p.Runder_p_e, c) -
              p.q_p_g * R(p.R_p_g, x) * R(p.Runder_p_g, c);
  r[1].gain = p.q_s_p * R(p.R_s_p, x);
  r[2].self = -p.q_ex_e * R(p.R_ex_e, x) * R(p.Rbar_ex_e, rho);
  r[2].gain = p.q_p_e * R(p.R_p_e, x) * R(p.Runder_p_e, c);
  r[3].self = -p.q_ex_g * R(p.R_ex_g, x) * R(p.Rbar_ex_g, rho);
  r[3].gain = p.q_p_g * R(p.R_p_g, x) * R(p.Runder_p_g, c);
  return r;
}

constexpr std::array<int, 4> kFeeder{-1, 0, 1, 1};

}  // namespace

std::array<double, 4> sources(const crypt_sim::Parameters& p, double x, double rho, double rs,
                              double rp, double re, double rg, double c) {
  const double fs = rs * p.q_div_s * (1 - R(p.R_div_s, x)) * (1 - R(p.Rbar_div_s, rho)) *
                        (1 - R(p.Runder_div_s, c)) -
                    rs * p.q_s_p * R(p.R_s_p, x);
  const double fp = rp * p.q_div_p * (1 - R(p.R_div_p, x)) * (1 - R(p.Rbar_div_p, rho)) -
                    rp * p.q_p_e * R(p.R_p_e, x) * R(p.Runder_p_e, c) -
                    rp * p.q_p_g * R(p.R_p_g, x) * R(p.Runder_p_g, c) +
                    rs * p.q_s_p * R(p.R_s_p, x);
  const double fe = rp * p.q_p_e * R(p.R_p_e, x) * R(p.Runder_p_e, c) -
                    re * p.q_ex_e * R(p.R_ex_e, x) * R(p.Rbar_ex_e, rho);
  const double fg = rp * p.q_p_g * R(p.R_p_g, x) * R(p.Runder_p_g, c) -
                    rg * p.q_ex_g * R(p.R_ex_g, x) * R(p.Rbar_ex_g, rho);
  return {fs, fp, fe, fg};
}

Mat zeros(std::size_t n) { return Mat(n, Vec(n, 0.0)); }

Vec gauss_solve(Mat a, Vec b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    }
    if (a[piv][k] == 0.0) throw std::runtime_error("singular dense system");
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= m * a[k][j];
      b[i] -= m * b[k];
    }
  }
  Vec x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

namespace {

/// Adds the conservative update dt/dx (F_{j+1/2} - F_{j-1/2}) for a face whose
/// flux is the linear form `flux` (one coefficient per cell) between cells j, j+1.
void add_face(Mat& a, std::size_t j, const Vec& flux, double dt_dx) {
  for (std::size_t k = 0; k < flux.size(); ++k) {
    a[j][k] += dt_dx * flux[k];
    if (j + 1 < a.size()) a[j + 1][k] -= dt_dx * flux[k];
  }
}

}  // namespace

Step step(const Input& in, double tol, int max_iter) {
  const std::size_t n = in.c_b.size();
  const double dx = 1.0 / static_cast<double>(n);
  const double dt = in.dt;
  const double eps = in.eps;
  const auto& p = in.params;
  auto x = [&](std::size_t j) { return (static_cast<double>(j) + 0.5) * dx; };

  Vec rho_old(n, 0.0);
  for (const Vec& r : in.rho_i) {
    for (std::size_t j = 0; j < n; ++j) rho_old[j] += r[j];
  }

  // total density: diffusion coefficient eps + mean of rho^n at each face
  Mat a = zeros(n);
  for (std::size_t j = 0; j < n; ++j) a[j][j] = 1.0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double coef = eps + 0.5 * (rho_old[j] + rho_old[j + 1]);
    Vec flux(n, 0.0);
    flux[j] = coef / dx;
    flux[j + 1] = -coef / dx;
    add_face(a, j, flux, dt / dx);
  }
  Vec v = rho_old;
  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    Vec b(n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto f = sources(p, x(j), v[j] - eps, in.rho_i[0][j], in.rho_i[1][j], in.rho_i[2][j],
                             in.rho_i[3][j], in.c_b[j]);
      b[j] = rho_old[j] + dt * (f[0] + f[1] + f[2] + f[3]);
    }
    Vec next = gauss_solve(a, b);
    double diff = 0.0;
    for (std::size_t j = 0; j < n; ++j) diff = std::max(diff, std::abs(next[j] - v[j]));
    v = std::move(next);
    if (diff <= tol) {
      converged = true;
      break;
    }
  }
  if (!converged) throw std::runtime_error("oracle fixed point did not converge");

  Step out;
  out.rho = v;
  for (std::size_t i = 0; i < 4; ++i) {
    Mat m = zeros(n);
    Vec b(n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto r = rates(p, x(j), v[j] - eps, in.c_b[j])[i];
      m[j][j] = 1.0 - dt * r.self;
      b[j] = in.rho_i[i][j];
      if (kFeeder[i] >= 0) b[j] += dt * r.gain * out.rho_i[kFeeder[i]][j];
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double u = -(v[j + 1] - v[j]) / dx;
      Vec flux(n, 0.0);
      flux[j] += eps / dx;
      flux[j + 1] -= eps / dx;
      if (u > 0.0) {
        flux[j] += u;
      } else {
        flux[j + 1] += u;
      }
      add_face(m, j, flux, dt / dx);
    }
    out.rho_i[i] = gauss_solve(m, b);
  }

  Mat c = zeros(n);
  Vec b(n);
  for (std::size_t j = 0; j < n; ++j) {
    c[j][j] = 1.0;
    const double cn = in.c_b[j];
    b[j] = cn + p.gamma * dt * (cn + p.c_b_d) / (1.0 + cn + p.c_b_d) *
                    (out.rho_i[2][j] + out.rho_i[3][j]);
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {
    Vec flux(n, 0.0);
    flux[j] = p.sigma_b / dx;
    flux[j + 1] = -p.sigma_b / dx;
    add_face(c, j, flux, dt / dx);
  }
  {
    // outflow through x = 1 against the boundary value 0, half a cell away
    Vec flux(n, 0.0);
    flux[n - 1] = p.sigma_b / (0.5 * dx);
    add_face(c, n - 1, flux, dt / dx);
  }
  out.c_b = gauss_solve(c, b);
  return out;
}

}  // namespace oracle
