#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fvd {

// Argument outside the documented domain of an operation.
class InputDomainError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// An iterative solver ran out of budget. Carries the energy (or residual) trace
// so callers can report how far it got.
class ConvergenceError : public std::runtime_error {
  public:
    ConvergenceError(const std::string &what, std::vector<double> trace = {})
        : std::runtime_error(what), trace_(std::move(trace)) {}
    [[nodiscard]] const std::vector<double> &trace() const noexcept { return trace_; }

  private:
    std::vector<double> trace_;
};

// NaN/Inf or a broken numerical invariant detected mid-computation.
class NumericalFault : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace fvd
