// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#include "reap/terminal_design.hpp"

#include <cmath>
#include <sstream>

#include "reap/errors.hpp"
#include "reap/linear_program.hpp"
#include "reap/log.hpp"

namespace reap {
namespace {

constexpr double kZeroNormal = 1e-12;

void check_weights(const Matrix& A, const Matrix& B, const Matrix& Qx, const Matrix& Qu) {
  const auto n = A.rows(), p = B.cols();
  if (A.cols() != n || B.rows() != n) throw DimensionError("solve_dare: A must be n x n and B n x p");
  if (Qx.rows() != n || Qx.cols() != n) throw DimensionError("solve_dare: Q_x must be n x n");
  if (Qu.rows() != p || Qu.cols() != p) throw DimensionError("solve_dare: Q_u must be p x p");
  Eigen::LLT<Matrix> llt(0.5 * (Qu + Qu.transpose()));
  if (llt.info() != Eigen::Success) throw InputError("Q_u must be positive definite");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Qx + Qx.transpose()));
  if (es.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff())) {
    throw InputError("Q_x must be positive semidefinite");
  }
}

Matrix closed_loop(const LtiModel& model, const Matrix& K) {
  if (K.rows() != model.p() || K.cols() != model.n()) throw DimensionError("K must be p x n");
  return model.A() + model.B() * K;
}

HalfspaceSet polytope_up_to(const LtiModel& model, const Matrix& K, const SteadyStateTarget& target,
                            const HalfspaceSet& X, const HalfspaceSet& U, int omega) {
  return X.append(terminal_rows(model, K, X, U, omega).halfspaces(target));
}

}  // namespace

Matrix solve_dare(const Matrix& A, const Matrix& B, const Matrix& Qx, const Matrix& Qu,
                  const DareOptions& options) {
  check_weights(A, B, Qx, Qu);
  Matrix P = options.initial ? *options.initial : Qx;
  if (P.rows() != A.rows() || P.cols() != A.cols()) throw DimensionError("solve_dare: bad initial iterate");
  for (int k = 0; k < options.max_iterations; ++k) {
    const Matrix BtP = B.transpose() * P;
    const Matrix S = Qu + BtP * B;
    const Matrix G = S.ldlt().solve(BtP * A);
    Matrix next = Qx + A.transpose() * P * A - (A.transpose() * P * B) * G;
    next = 0.5 * (next + next.transpose());
    if (!next.allFinite()) throw NumericalError("solve_dare: iteration diverged");
    const double change = (next - P).cwiseAbs().maxCoeff();
    P = std::move(next);
    if (change <= options.tolerance * std::max(1.0, P.cwiseAbs().maxCoeff())) return P;
  }
  throw NumericalError("solve_dare: no convergence within " + std::to_string(options.max_iterations) +
                       " iterations");
}

double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Qx, const Matrix& Qu,
                     const Matrix& P) {
  const Matrix AtPB = A.transpose() * P * B;
  const Matrix S = Qu + B.transpose() * P * B;
  return (P - A.transpose() * P * A + AtPB * S.ldlt().solve(AtPB.transpose()) - Qx).norm();
}

Matrix terminal_gain(const Matrix& A, const Matrix& B, const Matrix& Qu, const Matrix& QN) {
  const Matrix S = Qu + B.transpose() * QN * B;
  Eigen::FullPivLU<Matrix> lu(S);
  if (!lu.isInvertible()) throw NumericalError("terminal_gain: Q_u + B'Q_N B is singular");
  return -lu.solve(B.transpose() * QN * A);
}

Vector TerminalRows::offsets(const SteadyStateTarget& target) const {
  return constant + state_gain * target.x_bar + input_gain * target.u_bar;
}

HalfspaceSet TerminalRows::halfspaces(const SteadyStateTarget& target) const {
  const Vector all = offsets(target);
  std::vector<int> keep;
  for (int i = 0; i < size(); ++i) {
    if (normals.row(i).norm() > kZeroNormal) {
      keep.push_back(i);
    } else if (all(i) > 1e-9) {
      throw InfeasibleProblemError("terminal constraints cannot hold for this reference (constant row " +
                                   std::to_string(i) + " evaluates to " + std::to_string(all(i)) + ")");
    }
  }
  Matrix N(keep.size(), normals.cols());
  Vector o(keep.size());
  for (size_t k = 0; k < keep.size(); ++k) {
    N.row(k) = normals.row(keep[k]);
    o(k) = all(keep[k]);
  }
  return HalfspaceSet(std::move(N), std::move(o));
}

TerminalRows terminal_rows_at(const LtiModel& model, const Matrix& K, const HalfspaceSet& X,
                              const HalfspaceSet& U, int j) {
  const int n = model.n();
  const Matrix Acl = closed_loop(model, K);
  if (X.dim() != n || U.dim() != model.p()) throw DimensionError("terminal rows: set dimensions");
  // Acl^j and S_j = sum_{l<j} Acl^l
  Matrix power = Matrix::Identity(n, n);
  Matrix S = Matrix::Zero(n, n);
  for (int l = 0; l < j; ++l) {
    S += power;
    power = Acl * power;
  }
  const Matrix& B = model.B();
  const int cx = j >= 1 ? X.size() : 0;
  const int rows = cx + U.size();
  TerminalRows out;
  out.normals.resize(rows, n);
  out.constant.resize(rows);
  out.state_gain.resize(rows, n);
  out.input_gain.resize(rows, model.p());
  if (cx > 0) {
    const Matrix& a = X.normals();
    out.normals.topRows(cx) = a * power;
    out.constant.head(cx) = X.offsets();
    out.input_gain.topRows(cx) = a * S * B;
    out.state_gain.topRows(cx) = -a * S * B * K;
  }
  const Matrix& c = U.normals();
  // kappa(x_j) = K Acl^j x + K S_j (B u_bar - B K x_bar) - K x_bar + u_bar
  out.normals.bottomRows(U.size()) = c * K * power;
  out.constant.tail(U.size()) = U.offsets();
  out.input_gain.bottomRows(U.size()) = c * K * S * B + c;
  out.state_gain.bottomRows(U.size()) = -c * K * S * B * K - c * K;
  return out;
}

TerminalRows terminal_rows(const LtiModel& model, const Matrix& K, const HalfspaceSet& X,
                           const HalfspaceSet& U, int omega) {
  if (omega < 1) throw InputError("terminal rows: omega must be at least 1");
  std::vector<TerminalRows> parts;
  int rows = 0;
  for (int j = 0; j <= omega; ++j) {
    parts.push_back(terminal_rows_at(model, K, X, U, j));
    rows += parts.back().size();
  }
  TerminalRows out;
  out.normals.resize(rows, model.n());
  out.constant.resize(rows);
  out.state_gain.resize(rows, model.n());
  out.input_gain.resize(rows, model.p());
  int r = 0;
  for (const auto& part : parts) {
    out.normals.middleRows(r, part.size()) = part.normals;
    out.constant.segment(r, part.size()) = part.constant;
    out.state_gain.middleRows(r, part.size()) = part.state_gain;
    out.input_gain.middleRows(r, part.size()) = part.input_gain;
    r += part.size();
  }
  return out;
}

HalfspaceSet terminal_halfspaces(const LtiModel& model, const Matrix& K,
                                 const SteadyStateTarget& target, int omega, const HalfspaceSet& X,
                                 const HalfspaceSet& U) {
  return terminal_rows(model, K, X, U, omega).halfspaces(target);
}

namespace {

enum class Redundancy { Redundant, NotRedundant, Unbounded };

Redundancy check_redundancy(const LtiModel& model, const Matrix& K, const SteadyStateTarget& target,
                            const HalfspaceSet& X, const HalfspaceSet& U, int omega, double tol) {
  const HalfspaceSet poly = polytope_up_to(model, K, target, X, U, omega);
  const TerminalRows next = terminal_rows_at(model, K, X, U, omega + 1);
  const Vector g = next.offsets(target);
  const Vector b = -poly.offsets();
  bool unbounded = false;
  for (int i = 0; i < next.size(); ++i) {
    const Vector h = next.normals.row(i).transpose();
    if (h.norm() <= kZeroNormal) {
      if (g(i) > tol) return Redundancy::NotRedundant;
      continue;
    }
    const LpResult lp = maximize(h, poly.normals(), b);
    if (lp.status == LpStatus::Infeasible) {
      throw InfeasibleProblemError("terminal set is empty for this reference");
    }
    if (lp.status == LpStatus::Unbounded) {
      unbounded = true;
      continue;
    }
    if (lp.value + g(i) > tol) return Redundancy::NotRedundant;
  }
  return unbounded ? Redundancy::Unbounded : Redundancy::Redundant;
}

}  // namespace

bool rows_redundant_after(const LtiModel& model, const Matrix& K, const SteadyStateTarget& target,
                          const HalfspaceSet& X, const HalfspaceSet& U, int omega, double tolerance) {
  return check_redundancy(model, K, target, X, U, omega, tolerance) == Redundancy::Redundant;
}

int omega_star(const LtiModel& model, const Matrix& K, const SteadyStateTarget& target,
               const HalfspaceSet& X, const HalfspaceSet& U, const OmegaOptions& options) {
  const double rho = spectral_radius(closed_loop(model, K));
  if (!(rho < 1.0)) {
    std::ostringstream os;
    os << "omega_star: spectral radius of A+BK is " << rho << " (must be < 1)";
    throw NumericalError(os.str());
  }
  bool saw_unbounded = false;
  for (int omega = 1; omega <= options.cap; ++omega) {
    const Redundancy r = check_redundancy(model, K, target, X, U, omega, options.tolerance);
    if (r == Redundancy::Redundant) return omega;
    saw_unbounded = saw_unbounded || r == Redundancy::Unbounded;
  }
  std::string msg = "omega_star: no finite index up to " + std::to_string(options.cap);
  if (saw_unbounded) msg += "; the constraint polytope is unbounded, bound the state set";
  throw NumericalError(msg);
}

Vector terminal_law(const Matrix& K, const SteadyStateTarget& target, const Vector& x) {
  return target.u_bar + K * (x - target.x_bar);
}

namespace {

bool forward_containment(const LtiModel& model, const Matrix& K, const SteadyStateTarget& target,
                         const HalfspaceSet& X, const HalfspaceSet& U, const HalfspaceSet& terminal,
                         int steps) {
  std::mt19937_64 rng(12345);
  std::vector<Vector> points;
  try {
    points = sample_polytope(X.append(terminal), 200, rng);
  } catch (const InfeasibleProblemError&) {
    return false;
  }
  for (Vector x : points) {
    for (int k = 0; k < steps; ++k) {
      const Vector u = terminal_law(K, target, x);
      if (!X.contains(x, 1e-9) || !U.contains(u, 1e-9)) return false;
      x = model.A() * x + model.B() * u;
    }
  }
  return true;
}

}  // namespace

TerminalDesign design_terminal(const LtiModel& model, const Matrix& Qx, const Matrix& Qu,
                               const SteadyStateTarget& target, const HalfspaceSet& X,
                               const HalfspaceSet& U, const TerminalOverrides& overrides) {
  TerminalDesign design;
  design.QN = solve_dare(model.A(), model.B(), Qx, Qu);
  design.K = overrides.K ? *overrides.K : terminal_gain(model.A(), model.B(), Qu, design.QN);
  const double rho = spectral_radius(closed_loop(model, design.K));
  if (!(rho < 1.0)) {
    std::ostringstream os;
    os << "spectral radius of A+BK is " << rho << " (must be < 1)";
    throw NumericalError(os.str());
  }
  if (overrides.omega) {
    if (*overrides.omega < 1) throw InputError("omega override must be at least 1");
    design.omega_star = *overrides.omega;
  } else {
    design.omega_star = omega_star(model, design.K, target, X, U);
  }
  design.rows = terminal_rows(model, design.K, X, U, design.omega_star);
  design.terminal_halfspaces = design.rows.halfspaces(target);
  if (overrides.omega &&
      !forward_containment(model, design.K, target, X, U, design.terminal_halfspaces,
                           2 * design.omega_star + 10)) {
    warn("terminal set with omega = " + std::to_string(design.omega_star) +
         " fails the forward-simulation containment check");
  }
  return design;
}

}  // namespace reap
