#pragma once

#include <stdexcept>
#include <string>

namespace hsgp {

// Numerical failure that survived all recovery attempts (e.g. Cholesky
// breakdown after jitter escalation). Maps to CLI exit code 3; validation
// errors (std::invalid_argument, std::length_error) map to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hsgp
