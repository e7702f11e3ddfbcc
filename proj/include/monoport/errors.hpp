#pragma once

#include <stdexcept>
#include <string>

namespace monoport {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed argument: bad dimensions, non-finite values, invalid parameters.
class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what) : Error(what) {}
};

/// Input lies outside the domain of a relation (names the violated constraint).
class DomainViolation : public Error {
 public:
  explicit DomainViolation(const std::string& what) : Error(what) {}
};

/// A network or relation could not be built in the requested orientation.
class ConstructionError : public Error {
 public:
  explicit ConstructionError(const std::string& what) : Error(what) {}
};

/// No applicable algorithm, or inconsistent solver settings.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// A numerical subroutine failed (singular system, root finder stall, ...).
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what) {}
};

/// Iteration residual blew up past the divergence threshold.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, int iteration, double residual)
      : NumericalError(what), iteration_(iteration), residual_(residual) {}

  [[nodiscard]] int iteration() const { return iteration_; }
  [[nodiscard]] double residual() const { return residual_; }

 private:
  int iteration_;
  double residual_;
};

}  // namespace monoport
