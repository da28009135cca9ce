#pragma once

#include <stdexcept>
#include <string>

namespace ergclt {

// Parameter outside the admissible range of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An input violates a documented precondition (e.g. an uncentered observable).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Iterative method stopped at its cap without meeting the residual target.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// Periodic support structure could not be identified.
class DetectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A series diagnostic indicates the computed quantity is not trustworthy.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid run configuration or command-line usage.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ergclt
