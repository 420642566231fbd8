#pragma once

#include <stdexcept>
#include <string>

namespace wavedecay {

/// Raised when an input violates an operation's precondition (bad grid,
/// non-positive frequency, ellipticity violation, malformed file, ...).
class PreconditionError : public std::invalid_argument {
 public:
  explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when an iterative numerical procedure does not converge.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw PreconditionError(msg);
}

}  // namespace detail
}  // namespace wavedecay
