#pragma once

#include <stdexcept>
#include <string>

namespace splogsum {

// Bad option values, malformed penalty specs, inconsistent experiment setup.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable or malformed input data, label problems, dimension mismatches.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure inside the optimizer (non-finite objective, divergence).
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace splogsum
