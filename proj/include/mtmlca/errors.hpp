#pragma once

#include <stdexcept>
#include <string>

namespace mtmlca {

/// Invalid or inconsistent configuration (layouts, budgets, architectures).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A call argument violates the operation's precondition.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The problem is too large for an exact search under the active guard.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No feasible allocation remains after applying exclusions.
class ExhaustionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, int epoch)
      : std::runtime_error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace mtmlca
