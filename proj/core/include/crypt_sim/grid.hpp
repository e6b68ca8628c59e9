#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace crypt_sim {

/// Uniform cell-centred mesh on (0, 1).
class Grid {
 public:
  /// Throws ValidationError unless n_cells >= 2.
  explicit Grid(std::size_t n_cells);

  std::size_t size() const noexcept { return n_; }
  double dx() const noexcept { return dx_; }
  double center(std::size_t j) const noexcept { return (static_cast<double>(j) + 0.5) * dx_; }
  std::vector<double> centers() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t n_;
  double dx_;
};

/// Cell averages on a Grid. Value type; arithmetic requires matching grids.
class Field {
 public:
  explicit Field(const Grid& grid, double value = 0.0);
  Field(const Grid& grid, std::vector<double> values);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator[](std::size_t j) noexcept { return values_[j]; }
  double operator[](std::size_t j) const noexcept { return values_[j]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  double min() const noexcept;
  double max() const noexcept;
  bool all_finite() const noexcept;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator+=(double c) noexcept;
  Field& operator*=(double c) noexcept;

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator+(Field a, double c) { return a += c; }
  friend Field operator*(double c, Field a) { return a *= c; }

  friend bool operator==(const Field&, const Field&) = default;

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// (u[j+1] - u[j]) / dx at the N - 1 interior faces. Boundary faces carry no
/// flux under the homogeneous Neumann condition and are excluded.
std::vector<double> face_gradient(const Field& u);

/// dx * sum u[j]
double integrate(const Field& u) noexcept;

/// dx * sum u[j]^2
double l2_norm_sq(const Field& u) noexcept;

double linf(const Field& u) noexcept;

/// sum |u[j+1] - u[j]|
double tv(const Field& u) noexcept;

/// dx * sum over interior faces of g^2 with g from face_gradient.
double gradient_norm_sq(const Field& u);

/// Gradient norm for a field that vanishes at x = 1 through a half-cell ghost:
/// interior faces as in gradient_norm_sq plus (dx / 2) * (c[N-1] / (dx / 2))^2.
double dirichlet_gradient_norm_sq(const Field& c);

}  // namespace crypt_sim
