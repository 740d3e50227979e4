#pragma once

#include <stdexcept>
#include <string>

namespace slitflow {

/// Base class for all slitflow errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A physical or slit parameter violates its invariant (wrong sign,
/// non-finite value, ...).
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

/// Modes combined into one system must agree exactly on hbar and mass.
class MismatchedParamsError : public Error {
 public:
  using Error::Error;
};

/// Velocity or acceleration was requested at a point where the total
/// density is at or below the node threshold; the flow field is
/// undefined there and we refuse to return clamped values.
class NodeError : public Error {
 public:
  NodeError(double x, double t, double log_density);
  double x() const { return x_; }
  double t() const { return t_; }
  /// log of the offending density (the density itself may underflow).
  double log_density() const { return log_density_; }

 private:
  double x_, t_, log_density_;
};

/// The adaptive integrator drove the step size below its floor,
/// which signals a stiff region (usually the neighborhood of a node).
class StepUnderflowError : public Error {
 public:
  using Error::Error;
};

/// A finite-difference stencil produced non-finite values, e.g. because
/// it straddles a wavefunction node.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Scenario config file could not be parsed; carries the line number.
class ConfigParseError : public Error {
 public:
  ConfigParseError(int line, const std::string& what_arg);
  int line() const { return line_; }

 private:
  int line_;
};

/// Wraps an integrator error with the index of the failing trajectory.
class TrajectoryError : public Error {
 public:
  TrajectoryError(int index, const std::string& what_arg);
  int index() const { return index_; }

 private:
  int index_;
};

}  // namespace slitflow
