#pragma once

#include <stdexcept>
#include <string>

namespace paritysim {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or non-finite physical parameter.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A denominator of the loop or mirror algebra vanished.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// Structurally inconsistent setup (e.g. unequal round-trip times for the transient).
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

// The two conditional output fields cannot be told apart.
class DegenerateMeasurementError : public Error {
 public:
  using Error::Error;
};

// No loop reflectivity satisfies the weak-driving constraint.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

// Fock cutoff cannot hold the field.
class CutoffError : public Error {
 public:
  using Error::Error;
};

// Density matrix left the physical set during integration.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& message)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace paritysim
