// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#include "reap/condensed_qp.hpp"

#include <vector>

#include "reap/errors.hpp"

namespace reap {
namespace {

constexpr double kZeroNormal = 1e-12;
constexpr double kConstantRowTol = 1e-9;

Matrix block_weights(const Matrix& Qx, const Matrix& QN, int N) {
  const auto n = Qx.rows();
  Matrix Q = Matrix::Zero((N + 1) * n, (N + 1) * n);
  for (int k = 0; k < N; ++k) Q.block(k * n, k * n, n, n) = Qx;
  Q.block(N * n, N * n, n, n) = QN;
  return Q;
}

Matrix input_weights(const Matrix& Qu, int N) {
  const auto p = Qu.rows();
  Matrix R = Matrix::Zero(N * p, N * p);
  for (int k = 0; k < N; ++k) R.block(k * p, k * p, p, p) = Qu;
  return R;
}

void check_cost_shapes(const PredictionOperator& pred, const Matrix& Qx, const Matrix& Qu,
                       const Matrix& QN) {
  if (Qx.rows() != pred.n || Qx.cols() != pred.n || QN.rows() != pred.n || QN.cols() != pred.n) {
    throw DimensionError("Q_x and Q_N must be n x n");
  }
  if (Qu.rows() != pred.p || Qu.cols() != pred.p) throw DimensionError("Q_u must be p x p");
}

// Affine description of all stacked rows: normals u + offset_x x + offset_c <= 0.
struct RowMap {
  Matrix normals, offset_x;
  Vector offset_c;
};

RowMap stacked_rows(const PredictionOperator& pred, const HalfspaceSet& X, const HalfspaceSet& U,
                    const HalfspaceSet& T) {
  const int n = pred.n, p = pred.p, N = pred.horizon;
  if (X.dim() != n || U.dim() != p) throw DimensionError("constraint set dimensions do not match the model");
  if (T.dim() != n) throw DimensionError("terminal halfspaces have the wrong dimension");
  const int rows = (N + 1) * X.size() + N * U.size() + T.size();
  RowMap map{Matrix::Zero(rows, N * p), Matrix::Zero(rows, n), Vector::Zero(rows)};
  int r = 0;
  for (int k = 0; k <= N; ++k) {
    map.normals.middleRows(r, X.size()) = X.normals() * pred.forced_block(k);
    map.offset_x.middleRows(r, X.size()) = X.normals() * pred.free_block(k);
    map.offset_c.segment(r, X.size()) = X.offsets();
    r += X.size();
  }
  for (int k = 0; k < N; ++k) {
    map.normals.block(r, k * p, U.size(), p) = U.normals();
    map.offset_c.segment(r, U.size()) = U.offsets();
    r += U.size();
  }
  map.normals.middleRows(r, T.size()) = T.normals() * pred.forced_block(N);
  map.offset_x.middleRows(r, T.size()) = T.normals() * pred.free_block(N);
  map.offset_c.segment(r, T.size()) = T.offsets();
  return map;
}

HalfspaceSet terminal_for(const TerminalDesign& terminal, const SteadyStateTarget& target) {
  if (terminal.rows.size() == 0) return terminal.terminal_halfspaces;
  return terminal.rows.halfspaces(target);
}

std::vector<int> varying_rows(const Matrix& normals, bool varying) {
  std::vector<int> idx;
  for (int i = 0; i < normals.rows(); ++i) {
    if ((normals.row(i).norm() > kZeroNormal) == varying) idx.push_back(i);
  }
  return idx;
}

Matrix select_rows(const Matrix& M, const std::vector<int>& idx) {
  Matrix out(idx.size(), M.cols());
  for (size_t k = 0; k < idx.size(); ++k) out.row(k) = M.row(idx[k]);
  return out;
}

Vector select_rows(const Vector& v, const std::vector<int>& idx) {
  Vector out(idx.size());
  for (size_t k = 0; k < idx.size(); ++k) out(k) = v(idx[k]);
  return out;
}

void check_constant_rows(const Matrix& Fx, const Vector& c, const Vector& x) {
  if (Fx.rows() == 0) return;
  const Vector v = Fx * x + c;
  Eigen::Index worst;
  const double value = v.maxCoeff(&worst);
  if (value > kConstantRowTol) {
    throw InfeasibleStateError("state violates a constraint that no input can affect (row value " +
                               std::to_string(value) + ")");
  }
}

}  // namespace

Vector PredictionOperator::predict(const Vector& x, const Vector& u) const {
  return free_response * x + forced_response * u;
}

PredictionOperator build_prediction(const LtiModel& model, int N) {
  if (N < 1) throw InputError("horizon N must be at least 1");
  const int n = model.n(), p = model.p();
  PredictionOperator pred;
  pred.horizon = N;
  pred.n = n;
  pred.p = p;
  pred.free_response = Matrix::Zero((N + 1) * n, n);
  pred.forced_response = Matrix::Zero((N + 1) * n, N * p);
  pred.free_response.topRows(n) = Matrix::Identity(n, n);
  for (int k = 1; k <= N; ++k) {
    pred.free_response.middleRows(k * n, n) = model.A() * pred.free_response.middleRows((k - 1) * n, n);
    // x(k) = A x(k-1) + B u(k-1)
    pred.forced_response.block(k * n, 0, n, (k - 1) * p) =
        model.A() * pred.forced_response.block((k - 1) * n, 0, n, (k - 1) * p);
    pred.forced_response.block(k * n, (k - 1) * p, n, p) = model.B();
  }
  return pred;
}

Matrix condensed_hessian(const PredictionOperator& pred, const Matrix& Qx, const Matrix& Qu,
                         const Matrix& QN) {
  check_cost_shapes(pred, Qx, Qu, QN);
  const Matrix& G = pred.forced_response;
  Matrix H = G.transpose() * block_weights(Qx, QN, pred.horizon) * G + input_weights(Qu, pred.horizon);
  return 0.5 * (H + H.transpose());
}

QuadraticCost build_cost(const PredictionOperator& pred, const Matrix& Qx, const Matrix& Qu,
                         const Matrix& QN, const SteadyStateTarget& target, const Vector& x_t) {
  check_cost_shapes(pred, Qx, Qu, QN);
  const int N = pred.horizon;
  const Matrix Qbar = block_weights(Qx, QN, N);
  const Matrix Rbar = input_weights(Qu, N);
  const Vector e = pred.free_response * x_t - target.x_bar.replicate(N + 1, 1);
  const Vector us = target.u_bar.replicate(N, 1);
  QuadraticCost cost;
  cost.H = condensed_hessian(pred, Qx, Qu, QN);
  cost.f = pred.forced_response.transpose() * (Qbar * e) - Rbar * us;
  cost.const_term = e.dot(Qbar * e) + us.dot(Rbar * us);
  return cost;
}

HalfspaceSet stack_constraints(const LtiModel& model, const PredictionOperator& pred,
                               const HalfspaceSet& X, const HalfspaceSet& U,
                               const TerminalDesign& terminal, const SteadyStateTarget& target,
                               const Vector& x_t) {
  if (x_t.size() != model.n()) throw DimensionError("stack_constraints: x_t has the wrong size");
  const RowMap map = stacked_rows(pred, X, U, terminal_for(terminal, target));
  const auto var = varying_rows(map.normals, true);
  const auto fixed = varying_rows(map.normals, false);
  check_constant_rows(select_rows(map.offset_x, fixed), select_rows(map.offset_c, fixed), x_t);
  return HalfspaceSet(select_rows(map.normals, var),
                      select_rows(map.offset_x, var) * x_t + select_rows(map.offset_c, var));
}

HalfspaceSet tighten(const HalfspaceSet& constraints, double beta) {
  if (!(beta > 0.0)) throw InputError("tighten: beta must be positive");
  return constraints.with_offsets(constraints.offsets().array() + 1.0 / beta);
}

CondensedQp tighten(const CondensedQp& qp, double beta) {
  CondensedQp out = qp;
  out.constraints = tighten(qp.constraints, beta);
  out.tightened = true;
  out.beta = beta;
  return out;
}

Vector terminal_rollout(const LtiModel& model, const Matrix& K, const SteadyStateTarget& target,
                        const Vector& x, int N) {
  const int p = model.p();
  Vector u(N * p);
  Vector xk = x;
  for (int k = 0; k < N; ++k) {
    u.segment(k * p, p) = terminal_law(K, target, xk);
    xk = model.A() * xk + model.B() * u.segment(k * p, p);
  }
  return u;
}

CondensedMpc::CondensedMpc(LtiModel model, HalfspaceSet X, HalfspaceSet U, const Matrix& Qx,
                           const Matrix& Qu, int N, TerminalDesign terminal, SteadyStateTarget target,
                           double beta)
    : model_(std::move(model)),
      X_(std::move(X)),
      U_(std::move(U)),
      Qx_(Qx),
      Qu_(Qu),
      pred_(build_prediction(model_, N)),
      terminal_(std::move(terminal)),
      target_(std::move(target)),
      beta_(beta) {
  if (!(beta_ > 0.0)) throw InputError("beta must be positive");
  H_ = condensed_hessian(pred_, Qx_, Qu_, terminal_.QN);
  h_max_eig_ = Eigen::SelfAdjointEigenSolver<Matrix>(H_, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  Qbar_ = block_weights(Qx_, terminal_.QN, N);
  Rbar_ = input_weights(Qu_, N);
  GtQ_ = pred_.forced_response.transpose() * Qbar_;
  x_bar_stack_ = target_.x_bar.replicate(N + 1, 1);
  u_bar_stack_ = target_.u_bar.replicate(N, 1);

  const RowMap map = stacked_rows(pred_, X_, U_, terminal_for(terminal_, target_));
  const auto var = varying_rows(map.normals, true);
  const auto fixed = varying_rows(map.normals, false);
  normals_ = select_rows(map.normals, var);
  offset_x_ = select_rows(map.offset_x, var);
  offset_c_ = select_rows(map.offset_c, var);
  const_x_ = select_rows(map.offset_x, fixed);
  const_c_ = select_rows(map.offset_c, fixed);
}

CondensedQp CondensedMpc::at(const Vector& x_t, bool tightened) const {
  if (x_t.size() != model_.n()) throw DimensionError("CondensedMpc::at: x_t has the wrong size");
  check_constant_rows(const_x_, const_c_, x_t);
  CondensedQp qp;
  qp.H = H_;
  qp.hessian_max_eig = h_max_eig_;
  const Vector e = pred_.free_response * x_t - x_bar_stack_;
  qp.f = GtQ_ * e - Rbar_ * u_bar_stack_;
  qp.const_term = e.dot(Qbar_ * e) + u_bar_stack_.dot(Rbar_ * u_bar_stack_);
  qp.beta = beta_;
  Vector offsets = offset_x_ * x_t + offset_c_;
  if (tightened) offsets.array() += 1.0 / beta_;
  qp.constraints = HalfspaceSet(normals_, std::move(offsets));
  qp.tightened = tightened;
  return qp;
}

}  // namespace reap
