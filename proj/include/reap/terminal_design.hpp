// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "reap/lti_model.hpp"

namespace reap {

struct DareOptions {
  /// Stop when max|P_{k+1} - P_k| <= tolerance * max(1, max|P_k|).
  double tolerance = 1e-12;
  int max_iterations = 100000;
  /// Starting iterate; Q_x when empty.
  std::optional<Matrix> initial;
};

/// Fixed-point Riccati iteration P <- Q_x + A'PA - A'PB (Q_u + B'PB)^-1 B'PA.
Matrix solve_dare(const Matrix& A, const Matrix& B, const Matrix& Qx, const Matrix& Qu,
                  const DareOptions& options = {});

/// Frobenius norm of the DARE residual at P.
double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Qx, const Matrix& Qu,
                     const Matrix& P);

/// K = -(Q_u + B'Q_N B)^-1 B'Q_N A.
Matrix terminal_gain(const Matrix& A, const Matrix& B, const Matrix& Qu, const Matrix& QN);

/// Terminal constraint rows over x = x_hat(N|t), with offsets that are affine
/// in the steady-state target:  offsets = constant + state_gain x_bar + input_gain u_bar.
struct TerminalRows {
  Matrix normals;
  Vector constant;
  Matrix state_gain;
  Matrix input_gain;

  int size() const { return static_cast<int>(normals.rows()); }
  Vector offsets(const SteadyStateTarget& target) const;
  /// Rows with nonzero normals. Constant rows that hold are dropped; a
  /// violated constant row throws InfeasibleProblemError.
  HalfspaceSet halfspaces(const SteadyStateTarget& target) const;
};

/// Rows generated by the terminal law at prediction step j:
/// state rows keep x_j in X (j >= 1), input rows keep kappa(x_j) in U (j >= 0).
TerminalRows terminal_rows_at(const LtiModel& model, const Matrix& K, const HalfspaceSet& X,
                              const HalfspaceSet& U, int j);

/// Terminal constraints for j = 1..omega (state and input) plus the input
/// constraint of the terminal law at j = 0.
TerminalRows terminal_rows(const LtiModel& model, const Matrix& K, const HalfspaceSet& X,
                           const HalfspaceSet& U, int omega);

HalfspaceSet terminal_halfspaces(const LtiModel& model, const Matrix& K,
                                 const SteadyStateTarget& target, int omega, const HalfspaceSet& X,
                                 const HalfspaceSet& U);

struct OmegaOptions {
  int cap = 500;
  double tolerance = 1e-9;
};

/// Redundancy of each row generated at step omega + 1 with respect to
/// X and the terminal rows for steps up to omega. True when all are redundant.
bool rows_redundant_after(const LtiModel& model, const Matrix& K, const SteadyStateTarget& target,
                          const HalfspaceSet& X, const HalfspaceSet& U, int omega,
                          double tolerance = 1e-9);

/// Smallest omega whose next-step rows are all redundant.
int omega_star(const LtiModel& model, const Matrix& K, const SteadyStateTarget& target,
               const HalfspaceSet& X, const HalfspaceSet& U, const OmegaOptions& options = {});

struct TerminalDesign {
  Matrix QN;
  Matrix K;
  int omega_star = 0;
  /// Parametric rows (re-evaluate offsets for another target).
  TerminalRows rows;
  /// Rows evaluated at the design target.
  HalfspaceSet terminal_halfspaces;

  int count() const { return terminal_halfspaces.size(); }
};

struct TerminalOverrides {
  std::optional<Matrix> K;
  std::optional<int> omega;
};

/// Full design: DARE, gain (unless overridden), omega* (unless overridden)
/// and the terminal halfspaces. Throws NumericalError when A+BK is not Schur.
TerminalDesign design_terminal(const LtiModel& model, const Matrix& Qx, const Matrix& Qu,
                               const SteadyStateTarget& target, const HalfspaceSet& X,
                               const HalfspaceSet& U, const TerminalOverrides& overrides = {});

/// Terminal law u = u_bar + K (x - x_bar).
Vector terminal_law(const Matrix& K, const SteadyStateTarget& target, const Vector& x);

}  // namespace reap
