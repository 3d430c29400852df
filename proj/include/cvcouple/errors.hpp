#pragma once

#include <stdexcept>
#include <string>

namespace cvcouple {

/// Base of every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input and configuration problems (CLI exit code 2).
class ConfigError : public Error { using Error::Error; };
class ValidationError : public Error { using Error::Error; };
class TopologyError : public Error { using Error::Error; };
class FormatError : public Error { using Error::Error; };
class GeometryError : public Error { using Error::Error; };

// Numerical failures (CLI exit code 3).
class DomainError : public Error { using Error::Error; };
class StabilityError : public Error { using Error::Error; };
class SolverBlowup : public Error { using Error::Error; };
class JunctionError : public Error { using Error::Error; };
class StateError : public Error { using Error::Error; };
class AtreticValveError : public Error { using Error::Error; };
class InvertedElementError : public Error { using Error::Error; };
class SingularCouplingError : public Error { using Error::Error; };
class LinearSolveError : public Error { using Error::Error; };
class NewtonDivergence : public Error { using Error::Error; };
class MetricsError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };

/// True for errors caused by bad input rather than by the numerics.
inline bool is_input_error(const std::exception& e) {
  return dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
         dynamic_cast<const TopologyError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
         dynamic_cast<const GeometryError*>(&e);
}

}  // namespace cvcouple
