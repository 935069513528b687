#pragma once

#include <stdexcept>
#include <string>

namespace blockage {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain where a formula is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Link heights leave no positive Tx/Rx gap.
class DegenerateGeometry : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An iterative scheme failed to reach its tolerance.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// No admissible solution exists in the requested search range.
class Infeasible : public Error {
 public:
  using Error::Error;
};

/// Configuration file problem; `field()` carries the dotted key path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace blockage
