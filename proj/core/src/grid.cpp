#include "crypt_sim/grid.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "crypt_sim/errors.hpp"

namespace crypt_sim {

Grid::Grid(std::size_t n_cells) : n_(n_cells), dx_(0.0) {
  if (n_cells < 2) throw ValidationError(fmt::format("grid needs at least 2 cells, got {}", n_cells));
  dx_ = 1.0 / static_cast<double>(n_cells);
}

std::vector<double> Grid::centers() const {
  std::vector<double> x(n_);
  for (std::size_t j = 0; j < n_; ++j) x[j] = center(j);
  return x;
}

Field::Field(const Grid& grid, double value) : grid_(grid), values_(grid.size(), value) {}

Field::Field(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw ValidationError(
        fmt::format("field has {} values but grid has {} cells", values_.size(), grid_.size()));
  }
}

double Field::min() const noexcept { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const noexcept { return *std::max_element(values_.begin(), values_.end()); }

bool Field::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

namespace {
void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw ValidationError("field arithmetic on mismatched grids");
}
}  // namespace

Field& Field::operator+=(const Field& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += other.values_[j];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= other.values_[j];
  return *this;
}

Field& Field::operator+=(double c) noexcept {
  for (auto& v : values_) v += c;
  return *this;
}

Field& Field::operator*=(double c) noexcept {
  for (auto& v : values_) v *= c;
  return *this;
}

std::vector<double> face_gradient(const Field& u) {
  const std::size_t n = u.size();
  const double inv_dx = 1.0 / u.grid().dx();
  std::vector<double> g(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j) g[j] = (u[j + 1] - u[j]) * inv_dx;
  return g;
}

double integrate(const Field& u) noexcept {
  double s = 0.0;
  for (double v : u.values()) s += v;
  return u.grid().dx() * s;
}

double l2_norm_sq(const Field& u) noexcept {
  double s = 0.0;
  for (double v : u.values()) s += v * v;
  return u.grid().dx() * s;
}

double linf(const Field& u) noexcept {
  double m = 0.0;
  for (double v : u.values()) m = std::max(m, std::abs(v));
  return m;
}

double tv(const Field& u) noexcept {
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < u.size(); ++j) s += std::abs(u[j + 1] - u[j]);
  return s;
}

double gradient_norm_sq(const Field& u) {
  double s = 0.0;
  for (double g : face_gradient(u)) s += g * g;
  return u.grid().dx() * s;
}

double dirichlet_gradient_norm_sq(const Field& c) {
  const double half = 0.5 * c.grid().dx();
  const double g_boundary = -c[c.size() - 1] / half;
  return gradient_norm_sq(c) + half * g_boundary * g_boundary;
}

}  // namespace crypt_sim
