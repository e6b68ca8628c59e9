#pragma once

#include <functional>
#include <vector>

#include "crypt_sim/grid.hpp"

namespace crypt_sim {

/// A x = rhs with A tridiagonal. Row j reads
///   lower[j-1] x[j-1] + diag[j] x[j] + upper[j] x[j+1] = rhs[j].
struct TridiagonalSystem {
  std::vector<double> lower;  // N - 1
  std::vector<double> diag;   // N
  std::vector<double> upper;  // N - 1
  std::vector<double> rhs;    // N

  explicit TridiagonalSystem(std::size_t n = 0);

  std::size_t size() const noexcept { return diag.size(); }
  bool consistent() const noexcept;

  /// A x
  std::vector<double> apply(const std::vector<double>& x) const;

  /// Positive diagonal, nonpositive off-diagonals and strict diagonal
  /// dominance by rows or by columns. Either form makes A a nonsingular
  /// M-matrix, so A^{-1} >= 0 entrywise.
  bool is_m_matrix() const noexcept;
};

/// Thomas elimination, O(N). Throws ZeroPivot on a pivot below 1e-300 in
/// magnitude and ValidationError on inconsistent lengths.
std::vector<double> solve_tridiagonal(const TridiagonalSystem& sys);

struct PicardResult {
  Field value;
  int iterations = 0;
};

using FieldMap = std::function<Field(const Field&)>;

/// Successive substitution v_{k+1} = map(v_k) from v_0 = start. Returns the
/// first iterate with linf(v_{k+1} - v_k) <= tol_abs together with k + 1.
/// Throws NoConvergence after max_iter applications of the map.
PicardResult picard_fixed_point(const FieldMap& map, const Field& start, double tol_abs,
                                int max_iter);

}  // namespace crypt_sim
