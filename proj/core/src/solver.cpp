#include "crypt_sim/solver.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "crypt_sim/errors.hpp"

namespace crypt_sim {

TridiagonalSystem::TridiagonalSystem(std::size_t n)
    : lower(n > 0 ? n - 1 : 0), diag(n), upper(n > 0 ? n - 1 : 0), rhs(n) {}

bool TridiagonalSystem::consistent() const noexcept {
  const std::size_t n = diag.size();
  return n > 0 && lower.size() == n - 1 && upper.size() == n - 1 && rhs.size() == n;
}

std::vector<double> TridiagonalSystem::apply(const std::vector<double>& x) const {
  const std::size_t n = size();
  std::vector<double> y(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = diag[j] * x[j];
    if (j > 0) s += lower[j - 1] * x[j - 1];
    if (j + 1 < n) s += upper[j] * x[j + 1];
    y[j] = s;
  }
  return y;
}

bool TridiagonalSystem::is_m_matrix() const noexcept {
  const std::size_t n = size();
  bool rows = true;
  bool cols = true;
  for (std::size_t j = 0; j < n; ++j) {
    if (!(diag[j] > 0.0)) return false;
    if (j + 1 < n && (upper[j] > 0.0 || lower[j] > 0.0)) return false;
    const double row_off = (j > 0 ? -lower[j - 1] : 0.0) + (j + 1 < n ? -upper[j] : 0.0);
    // column j holds upper[j-1] (row j-1) and lower[j] (row j+1)
    const double col_off = (j > 0 ? -upper[j - 1] : 0.0) + (j + 1 < n ? -lower[j] : 0.0);
    rows = rows && diag[j] > row_off;
    cols = cols && diag[j] > col_off;
  }
  return rows || cols;
}

std::vector<double> solve_tridiagonal(const TridiagonalSystem& sys) {
  if (!sys.consistent()) {
    throw ValidationError(fmt::format(
        "inconsistent tridiagonal system: lower {}, diag {}, upper {}, rhs {}", sys.lower.size(),
        sys.diag.size(), sys.upper.size(), sys.rhs.size()));
  }
  constexpr double kMinPivot = 1e-300;
  const std::size_t n = sys.size();
  std::vector<double> c(n);  // modified super-diagonal
  std::vector<double> x(n);

  double pivot = sys.diag[0];
  if (!(std::abs(pivot) >= kMinPivot)) throw ZeroPivot(0, pivot);
  c[0] = n > 1 ? sys.upper[0] / pivot : 0.0;
  x[0] = sys.rhs[0] / pivot;
  for (std::size_t j = 1; j < n; ++j) {
    pivot = sys.diag[j] - sys.lower[j - 1] * c[j - 1];
    if (!(std::abs(pivot) >= kMinPivot)) throw ZeroPivot(j, pivot);
    c[j] = j + 1 < n ? sys.upper[j] / pivot : 0.0;
    x[j] = (sys.rhs[j] - sys.lower[j - 1] * x[j - 1]) / pivot;
  }
  for (std::size_t j = n - 1; j-- > 0;) x[j] -= c[j] * x[j + 1];
  return x;
}

PicardResult picard_fixed_point(const FieldMap& map, const Field& start, double tol_abs,
                                int max_iter) {
  if (!(tol_abs > 0.0)) throw ValidationError("picard tolerance must be positive");
  if (max_iter < 1) throw ValidationError("picard max_iter must be >= 1");
  Field current = start;
  double update = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= max_iter; ++k) {
    Field next = map(current);
    update = linf(next - current);
    if (!std::isfinite(update)) throw NoConvergence(k, update);
    if (update <= tol_abs) return {std::move(next), k};
    current = std::move(next);
  }
  throw NoConvergence(max_iter, update);
}

}  // namespace crypt_sim
