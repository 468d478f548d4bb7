#pragma once

#include <stdexcept>
#include <string>

namespace delaylab {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parameter violates its domain. `field` names the offending value using a
// dotted path ("mac.W", "rows[2].lambda[0]") when one is known.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Offered load at or above one; carries the offending utilization.
class InstabilityError : public Error {
 public:
  explicit InstabilityError(double rho)
      : Error("unstable system: rho = " + std::to_string(rho) + " >= 1"), rho_(rho) {}

  double rho() const noexcept { return rho_; }

 private:
  double rho_;
};

// The general switchover formula left its range of validity
// (P{Q >= 1} > 1 or a non-positive normalizing denominator).
class ModelRangeError : public Error {
 public:
  using Error::Error;
};

// Experiment configuration is inconsistent (e.g. a reused seed).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace delaylab
