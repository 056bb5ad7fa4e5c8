#pragma once

#include <stdexcept>
#include <string>

namespace dplab {

// Bad user input: maps to exit code 1 in the CLI.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation not defined for the requested model.
class Unsupported : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class AdmissibilityError : public std::runtime_error {
 public:
  AdmissibilityError(const std::string& what, int step, std::string bound)
      : std::runtime_error(what), step_(step), bound_(std::move(bound)) {}
  int step() const { return step_; }
  const std::string& bound() const { return bound_; }

 private:
  int step_;
  std::string bound_;
};

// No interior first-order solution exists (e.g. intensity hypothesis fails).
class NoAdmissibleOptimum : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dplab
