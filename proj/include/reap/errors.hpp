// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace reap {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes of matrices or vectors do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A caller-supplied value is outside its documented domain.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed (singular system, no convergence, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The reference admits no steady-state configuration.
class NoSteadyStateError : public Error {
 public:
  using Error::Error;
};

/// A constraint that does not depend on the decision variable is violated.
class InfeasibleStateError : public Error {
 public:
  using Error::Error;
};

/// The QP has an empty (or zero-volume) feasible set.
class InfeasibleProblemError : public Error {
 public:
  using Error::Error;
};

/// The warm start does not satisfy the solver invariants.
class InfeasibleWarmStartError : public Error {
 public:
  using Error::Error;
};

/// A barrier log argument is nonpositive.
class BarrierDomainError : public Error {
 public:
  using Error::Error;
};

/// Scenario cannot be set up (for example the initial sequence is infeasible).
class ScenarioSetupError : public Error {
 public:
  using Error::Error;
};

/// Scenario file could not be parsed or contains invalid values.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, int line = 0, int column = 0)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ")"
                       : what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace reap
