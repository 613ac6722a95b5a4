// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "reap/barrier.hpp"

namespace reap {

struct OracleSolution;

/// Primal-dual iterate. Invariants (checked by satisfies_invariants):
/// eta_i'u + gamma_i <= -epsilon and lambda_i >= epsilon.
struct PrimalDual {
  Vector u;
  Vector lambda;
};

/// Constant step-size multiplier (Euler baseline, no feasibility guarantee).
struct FixedSigma {
  double value = 0.0;
};

/// Largest step that keeps the iterate feasible. With curvature_cap the step
/// is further limited to 1/(d_tau L), L bounding the primal Hessian of B.
struct AdaptiveSigma {
  bool curvature_cap = true;
};

using SigmaPolicy = std::variant<FixedSigma, AdaptiveSigma>;

struct Budget {
  std::optional<long> max_iterations;
  std::optional<std::chrono::nanoseconds> deadline;

  static Budget iterations(long count) { return {count, std::nullopt}; }
  static Budget time(std::chrono::nanoseconds d) { return {std::nullopt, d}; }
  static Budget both(long count, std::chrono::nanoseconds d) { return {count, d}; }
};

struct ReapConfig {
  double d_tau = 1e-3;
  double beta = 1e4;
  double epsilon = 1e-6;
  double psi = 1e-8;
  /// Warm-start duals are floored at epsilon + dual_floor_margin.
  double dual_floor_margin = 1e-6;
  SigmaPolicy sigma_policy = AdaptiveSigma{};
  Budget budget = Budget::iterations(200);
  bool stall_detection = true;
  /// Stop after 5 consecutive iterations with |du| + |dlambda| <= convergence_tol.
  bool early_exit = true;
  double convergence_tol = 1e-10;
  /// Keep per-iteration records in the trace.
  bool record_trace = true;

  /// Throws InputError when a parameter is outside its domain.
  void validate() const;
  bool adaptive() const { return std::holds_alternative<AdaptiveSigma>(sigma_policy); }
};

struct TraceRecord {
  long tau = 0;
  double sigma = 0.0;
  double barrier = 0.0;
  double min_delta_u = 0.0;
  double min_delta_lambda = 0.0;
  std::optional<double> lyapunov;
};

enum class StopReason { Budget, Stall, Converged, Violation };

struct SolveTrace {
  std::vector<TraceRecord> records;
  long iterations = 0;
  bool stalled = false;
  bool converged = false;
  /// Fixed sigma only: the iterate left the barrier domain.
  bool violation = false;
  StopReason reason = StopReason::Budget;
  std::optional<double> initial_lyapunov;
};

/// Write the trace as CSV (tau,sigma,barrier,min_delta_u,min_delta_lambda,W).
void write_trace_csv(std::ostream& os, const SolveTrace& trace);

/// True when every row satisfies eta_i'u + gamma_i <= -epsilon (1 - rel_tol)
/// and every lambda_i >= epsilon (1 - rel_tol).
bool satisfies_invariants(const CondensedQp& qp, const PrimalDual& state, double epsilon,
                          double rel_tol = 0.0);

/// Shift the previous sequence one block and append the terminal law at the
/// last predicted state. Duals are floored at epsilon + margin. No checks.
PrimalDual shift_warm_start(const PrimalDual& prev, const LtiModel& model, const Matrix& K,
                            const SteadyStateTarget& target, const Vector& x_t, int N,
                            double dual_floor);

/// Terminal-law rollout with unit duals.
PrimalDual rollout_warm_start(const LtiModel& model, const Matrix& K, const SteadyStateTarget& target,
                              const Vector& x_t, int N, int rows);

/// Warm start per the shift-and-pad rule (or the rollout when prev is empty).
/// Throws InfeasibleWarmStartError when it violates the invariants on qp_t.
PrimalDual warm_start(const std::optional<PrimalDual>& prev, const LtiModel& model, const Matrix& K,
                      const SteadyStateTarget& target, const Vector& x_t, const CondensedQp& qp_t,
                      const ReapConfig& cfg);

/// Distance from u to the hyperplane eta'u + gamma + epsilon = 0, zero outside.
double primal_distance(const Vector& u, const Vector& eta, double gamma, double epsilon);
/// lambda - epsilon clamped at zero (warns when lambda < epsilon).
double dual_distance(double lambda, double epsilon);

/// Largest admissible step multiplier at state.
double sigma_bound(const CondensedQp& qp, const PrimalDual& state, const ReapConfig& cfg);

/// One Euler step of the primal-dual dynamics with multiplier sigma.
PrimalDual reap_step(const CondensedQp& qp, const PrimalDual& state, double sigma,
                     const ReapConfig& cfg);

struct ReapResult {
  PrimalDual state;
  SolveTrace trace;
};

/// Iterate until the budget runs out, a stall or convergence is detected, or
/// (fixed sigma) the iterate leaves the barrier domain.
ReapResult run(const CondensedQp& qp, const PrimalDual& warm, const ReapConfig& cfg,
               const OracleSolution* oracle = nullptr);

/// ||u - u_dagger||^2 + ||lambda - lambda_dagger||^2.
double lyapunov_w(const PrimalDual& state, const OracleSolution& oracle);

}  // namespace reap
