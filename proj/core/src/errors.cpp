#include "crypt_sim/errors.hpp"

#include <fmt/format.h>

namespace crypt_sim {

ZeroPivot::ZeroPivot(std::size_t row, double pivot)
    : Error(fmt::format("zero pivot {:g} at row {} of tridiagonal system", pivot, row)),
      row_(row),
      pivot_(pivot) {}

NoConvergence::NoConvergence(int iterations, double last_update)
    : Error(fmt::format("fixed-point iteration did not converge after {} iterations "
                        "(last update {:.3e}); reduce dt",
                        iterations, last_update)),
      iterations_(iterations),
      last_update_(last_update) {}

UnknownScenario::UnknownScenario(const std::string& name)
    : Error(fmt::format("unknown scenario '{}'", name)) {}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : Error(fmt::format("line {}, column {}: {}", line, column, message)),
      line_(line),
      column_(column) {}

IoError::IoError(const std::string& path, const std::string& message)
    : Error(fmt::format("{}: {}", path, message)) {}

}  // namespace crypt_sim
