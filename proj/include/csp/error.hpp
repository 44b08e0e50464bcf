#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace csp {

/// Scenario or configuration failed validation. Carries every violation found,
/// not just the first.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(std::vector<std::string> violations);

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Base for failures of the numerical stages (exit code 3 in the CLI).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularSystem : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class OutOfHorizon : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace csp
