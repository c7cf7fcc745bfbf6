#pragma once

#include <stdexcept>
#include <string>

namespace attractor_lab {

// Base of every library exception.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration, malformed input files, violated preconditions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Shape mismatch between points, metrics and configs.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of a function (e.g. log-polynomial law at t <= 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Non-finite state produced while integrating.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double time)
      : Error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

// A numerical procedure could not meet its own stopping rule
// (threshold too tight, continuity budget exhausted, non-dissipative horizon...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace attractor_lab
