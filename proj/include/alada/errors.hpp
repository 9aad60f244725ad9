#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace alada {

/// Operand shapes or lengths are incompatible.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An entry falls outside an operation's domain (sqrt of a negative, division by zero).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An object was used before it reached a valid state, e.g. reading a bias-corrected
/// moment before any accumulation.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Invalid configuration. `field()` names the offending option.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Training produced a non-finite loss.
class NanLossError : public std::runtime_error {
 public:
  explicit NanLossError(std::size_t step)
      : std::runtime_error("non-finite loss at step " + std::to_string(step)), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace alada
