#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sicae {

/// Non-finite or otherwise unusable numeric input.
class InvalidInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke a documented precondition (e.g. control outside [0,1]).
class ContractViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Integration produced a non-finite state.
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(std::size_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

/// Query outside the time span covered by a trajectory.
class RangeError : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

/// Scenario configuration failed validation. `field()` is the dotted path of
/// the offending entry.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/// Iterative solver stopped without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string& what, double last_cost, double violation)
      : std::runtime_error(what), last_cost_(last_cost), violation_(violation) {}
  double last_cost() const noexcept { return last_cost_; }
  double constraint_violation() const noexcept { return violation_; }

private:
  double last_cost_;
  double violation_;
};

}  // namespace sicae
