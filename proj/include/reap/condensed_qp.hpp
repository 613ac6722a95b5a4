// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "reap/lti_model.hpp"
#include "reap/terminal_design.hpp"

namespace reap {

/// Stacked prediction X = free_response x + forced_response u, with
/// X = (x(0), ..., x(N)) and u = (u(0), ..., u(N-1)).
struct PredictionOperator {
  Matrix free_response;
  Matrix forced_response;
  int horizon = 0;
  int n = 0;
  int p = 0;

  auto free_block(int k) const { return free_response.middleRows(k * n, n); }
  auto forced_block(int k) const { return forced_response.middleRows(k * n, n); }
  /// Stacked predicted states for initial state x and inputs u.
  Vector predict(const Vector& x, const Vector& u) const;
};

PredictionOperator build_prediction(const LtiModel& model, int N);

/// Cost u'Hu + 2f'u + const_term.
struct QuadraticCost {
  Matrix H;
  Vector f;
  double const_term = 0.0;
  double value(const Vector& u) const { return u.dot(H * u) + 2.0 * f.dot(u) + const_term; }
};

Matrix condensed_hessian(const PredictionOperator& pred, const Matrix& Qx, const Matrix& Qu,
                         const Matrix& QN);

QuadraticCost build_cost(const PredictionOperator& pred, const Matrix& Qx, const Matrix& Qu,
                         const Matrix& QN, const SteadyStateTarget& target, const Vector& x_t);

/// Strictly convex QP in the stacked inputs: min u'Hu + 2f'u + c subject to
/// constraints.normals * u + constraints.offsets <= 0.
struct CondensedQp {
  Matrix H;
  Vector f;
  double const_term = 0.0;
  HalfspaceSet constraints;
  bool tightened = false;
  double beta = 1e4;
  /// Largest eigenvalue of H (used by the curvature cap of the step size).
  double hessian_max_eig = 0.0;

  int dim() const { return static_cast<int>(H.rows()); }
  int rows() const { return constraints.size(); }
  double cost(const Vector& u) const { return u.dot(H * u) + 2.0 * f.dot(u) + const_term; }
};

/// Input sequences satisfying the state, input and terminal constraints from
/// x_t. Rows that do not depend on u are checked at x_t and dropped; a violated
/// one throws InfeasibleStateError.
HalfspaceSet stack_constraints(const LtiModel& model, const PredictionOperator& pred,
                               const HalfspaceSet& X, const HalfspaceSet& U,
                               const TerminalDesign& terminal, const SteadyStateTarget& target,
                               const Vector& x_t);

/// Offsets shifted by 1/beta. Throws InputError for beta <= 0.
HalfspaceSet tighten(const HalfspaceSet& constraints, double beta);
CondensedQp tighten(const CondensedQp& qp, double beta);

/// Rollout of the terminal law from x over N steps (stacked inputs).
Vector terminal_rollout(const LtiModel& model, const Matrix& K, const SteadyStateTarget& target,
                        const Vector& x, int N);

/// Per-scenario condensation. H, the constraint normals and the affine maps
/// from x(t) to the offsets are built once; at() produces the QP for one
/// sampling instant.
class CondensedMpc {
 public:
  CondensedMpc(LtiModel model, HalfspaceSet X, HalfspaceSet U, const Matrix& Qx, const Matrix& Qu,
               int N, TerminalDesign terminal, SteadyStateTarget target, double beta);

  /// QP at state x_t, tightened by 1/beta when `tightened`.
  CondensedQp at(const Vector& x_t, bool tightened = true) const;

  const LtiModel& model() const { return model_; }
  const PredictionOperator& prediction() const { return pred_; }
  const TerminalDesign& terminal() const { return terminal_; }
  const SteadyStateTarget& target() const { return target_; }
  const HalfspaceSet& state_set() const { return X_; }
  const HalfspaceSet& input_set() const { return U_; }
  const Matrix& Qx() const { return Qx_; }
  const Matrix& Qu() const { return Qu_; }
  int horizon() const { return pred_.horizon; }
  int dim() const { return pred_.horizon * model_.p(); }
  int rows() const { return static_cast<int>(normals_.rows()); }
  double beta() const { return beta_; }

 private:
  LtiModel model_;
  HalfspaceSet X_, U_;
  Matrix Qx_, Qu_;
  PredictionOperator pred_;
  TerminalDesign terminal_;
  SteadyStateTarget target_;
  double beta_;

  Matrix H_;
  double h_max_eig_ = 0.0;
  Matrix GtQ_;       // forced_response' * Qbar
  Vector x_bar_stack_;
  Vector u_bar_stack_;
  Matrix Qbar_;
  Matrix Rbar_;
  Matrix normals_;   // rows that depend on u
  Matrix offset_x_;  // offsets = offset_x_ x + offset_c_
  Vector offset_c_;
  Matrix const_x_;   // rows independent of u
  Vector const_c_;
};

}  // namespace reap
