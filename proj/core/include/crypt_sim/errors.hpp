#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crypt_sim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thomas elimination hit a pivot that is numerically zero.
class ZeroPivot : public Error {
 public:
  ZeroPivot(std::size_t row, double pivot);
  std::size_t row() const noexcept { return row_; }
  double pivot() const noexcept { return pivot_; }

 private:
  std::size_t row_;
  double pivot_;
};

/// Fixed-point iteration did not reach its tolerance.
class NoConvergence : public Error {
 public:
  NoConvergence(int iterations, double last_update);
  int iterations() const noexcept { return iterations_; }
  double last_update() const noexcept { return last_update_; }

 private:
  int iterations_;
  double last_update_;
};

/// A proven discrete bound (maximum principle, nonnegativity, energy) failed.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class UnknownScenario : public Error {
 public:
  explicit UnknownScenario(const std::string& name);
};

/// Rejected configuration values (e.g. q_inf*dt >= 1).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& message);
};

}  // namespace crypt_sim
