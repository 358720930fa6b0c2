#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace clustermax {

// Parameter outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Model or experiment configuration rejected before any simulation starts.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A stopping time or branching recursion ran past its iteration cap. The
// partial state is carried along so the caller can report it.
class CappedRealizationError : public std::runtime_error {
 public:
  CappedRealizationError(const std::string& what, std::uint64_t steps_taken, double partial_max)
      : std::runtime_error(what), steps_taken_(steps_taken), partial_max_(partial_max) {}

  std::uint64_t steps_taken() const noexcept { return steps_taken_; }
  double partial_max() const noexcept { return partial_max_; }

 private:
  std::uint64_t steps_taken_;
  double partial_max_;
};

// A structural identity of a realization failed to hold.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace clustermax
