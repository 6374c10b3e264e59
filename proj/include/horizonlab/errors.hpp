#pragma once

#include <stdexcept>
#include <string>

namespace horizonlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid (n, m) combination, including codimension < 3.
struct DimensionError : Error {
  using Error::Error;
};

// Evaluation point lies on the submanifold (kernel is singular there).
struct SingularityError : Error {
  using Error::Error;
};

// Argument outside the operation's domain (radius <= 0, step too large, ...).
struct DomainError : Error {
  using Error::Error;
};

// Adaptive quadrature hit its panel budget before reaching the tolerance.
struct AccuracyError : Error {
  AccuracyError(const std::string& what, double achieved_arg)
      : Error(what), achieved(achieved_arg) {}
  double achieved;  // best relative error estimate reached
};

// Tube radius at or beyond the reach of the submanifold.
struct ReachError : Error {
  using Error::Error;
};

// Requested grid resolution or mode is not supported for the shape.
struct ResolutionError : Error {
  using Error::Error;
};

// Solver left the admissible band (0, reach) or violated its confinement.
struct ConfinementError : Error {
  using Error::Error;
};

// Iteration budget exhausted; carries the best residual reached.
struct ConvergenceError : Error {
  ConvergenceError(const std::string& what, double best_residual_arg)
      : Error(what), best_residual(best_residual_arg) {}
  double best_residual;
};

// Barrier scan found no sign change: epsilon outside the small-eps regime.
struct BarrierNotFoundError : Error {
  using Error::Error;
};

// Configuration rejected; names the offending field.
struct ConfigError : Error {
  ConfigError(const std::string& field_arg, const std::string& what)
      : Error("config field '" + field_arg + "': " + what), field(field_arg) {}
  std::string field;
};

}  // namespace horizonlab
