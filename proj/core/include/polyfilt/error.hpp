#pragma once

#include <stdexcept>
#include <string>

namespace polyfilt {

// Singular systems, non-contractive dynamics, indefinite covariances,
// non-finite integrator states. Everything else is std::invalid_argument
// or std::out_of_range.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace polyfilt
