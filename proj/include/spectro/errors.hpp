#pragma once

#include <stdexcept>
#include <string>

namespace spectro {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad inputs: domain violations, malformed files/configs, schema mismatches.
// CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Fit failures: non-convergence, singular normal equations, NaN model output.
// CLI maps these to exit code 3.
class FitError : public Error {
 public:
  explicit FitError(const std::string& msg) : Error(msg) {}
};

}  // namespace spectro
