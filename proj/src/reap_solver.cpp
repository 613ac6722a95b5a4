// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#include "reap/reap_solver.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "reap/errors.hpp"
#include "reap/log.hpp"
#include "reap/oracle_qp.hpp"

namespace reap {
namespace {

// Relative safety factor on the primal distance. In exact arithmetic the
// bound lands the iterate on the shifted hyperplane; the factor keeps
// rounding on the inside.
constexpr double kPrimalSafety = 1.0 - 1e-9;
constexpr int kConvergedStreak = 5;

struct StepPlan {
  BarrierEval eval;
  Vector dual_dir;  // grad_lambda + phi
  double sigma = 0.0;
  double min_delta_u = 0.0;
  double min_delta_lambda = 0.0;
};

// Per-QP quantities the step planner reuses every iteration.
struct RowGeometry {
  Vector norms;      // |eta_i|
  Vector curvature;  // 2 eta_i' H eta_i / |eta_i|^2
  double h_max = 0.0;
};

RowGeometry row_geometry(const CondensedQp& qp) {
  RowGeometry geo;
  const Matrix& E = qp.constraints.normals();
  geo.norms = E.rowwise().norm();
  geo.curvature = 2.0 * (E * qp.H).cwiseProduct(E).rowwise().sum();
  for (int i = 0; i < geo.norms.size(); ++i) {
    geo.curvature(i) = geo.norms(i) > 0.0 ? geo.curvature(i) / (geo.norms(i) * geo.norms(i)) : 0.0;
  }
  geo.h_max = qp.hessian_max_eig > 0.0
                  ? qp.hessian_max_eig
                  : Eigen::SelfAdjointEigenSolver<Matrix>(qp.H, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  return geo;
}

StepPlan plan_step(const CondensedQp& qp, const PrimalDual& state, const ReapConfig& cfg,
                   const RowGeometry& geo) {
  const Vector& row_norms = geo.norms;
  const double h_max = geo.h_max;
  StepPlan plan;
  plan.eval = evaluate_barrier(qp, state.u, state.lambda);
  const Vector& g = plan.eval.grad_lambda;
  plan.dual_dir = g + projection_phi(state.lambda, g, cfg.epsilon);

  const double eps = cfg.epsilon;
  const int rows = qp.rows();
  // Row values on the tightened scale: s_i = -log_arg_i / beta.
  const Vector s = -plan.eval.log_args / qp.beta;
  double min_du = std::numeric_limits<double>::infinity();
  double min_dl = std::numeric_limits<double>::infinity();
  double sigma = std::numeric_limits<double>::infinity();
  const double grad_norm = std::max(plan.eval.grad_u.norm(), cfg.psi);
  for (int i = 0; i < rows; ++i) {
    const double du = std::max(-(s(i) + eps) / row_norms(i), 0.0);
    const double dl = std::max(state.lambda(i) - eps, 0.0);
    min_du = std::min(min_du, du);
    min_dl = std::min(min_dl, dl);
    // A step of length l moves row i by at most l*|eta_i|, while its slack is
    // du*|eta_i|. The textbook form du/(|eta_i|*|g|) is only safe for
    // |eta_i| >= 1, so rows with smaller normals use du/|g|.
    const double reach = du * std::min(1.0, row_norms(i));
    sigma = std::min(sigma, kPrimalSafety * reach / (cfg.d_tau * row_norms(i) * grad_norm));
    // Components moving away from the floor cannot cross it.
    if (plan.dual_dir(i) < 0.0) {
      sigma = std::min(sigma, dl / (cfg.d_tau * std::max(std::abs(plan.dual_dir(i)), cfg.psi)));
    }
  }
  plan.min_delta_u = rows > 0 ? min_du : 0.0;
  plan.min_delta_lambda = rows > 0 ? min_dl : 0.0;

  if (const auto* fixed = std::get_if<FixedSigma>(&cfg.sigma_policy)) {
    plan.sigma = fixed->value;
    return plan;
  }
  const auto& adaptive = std::get<AdaptiveSigma>(cfg.sigma_policy);
  if (adaptive.curvature_cap) {
    double L = 2.0 * h_max;
    for (int i = 0; i < rows; ++i) {
      const double w = qp.beta * row_norms(i) / plan.eval.log_args(i);
      const double lam = std::max(state.lambda(i), 0.0);
      L += lam * w * w;
      // Near a weakly active row the pair (eta_i'u, lambda_i) rotates with
      // squared frequency b = w^2 and damping a. Explicit Euler on such a
      // mode is stable only for steps below a/b.
      const double a = geo.curvature(i) + lam * w * w;
      const double b = w * w;
      if (a * a < 4.0 * b) sigma = std::min(sigma, a / (b * cfg.d_tau));
    }
    sigma = std::min(sigma, 1.0 / (cfg.d_tau * L));
  }
  if (!std::isfinite(sigma)) sigma = 1.0 / (cfg.d_tau * std::max(2.0 * h_max, cfg.psi));
  plan.sigma = std::max(sigma, 0.0);
  return plan;
}

PrimalDual apply_step(const PrimalDual& state, const StepPlan& plan, double sigma,
                      const ReapConfig& cfg) {
  PrimalDual next;
  next.u = state.u - (sigma * cfg.d_tau) * plan.eval.grad_u;
  next.lambda = state.lambda + (sigma * cfg.d_tau) * plan.dual_dir;
  if (cfg.adaptive()) next.lambda = next.lambda.cwiseMax(cfg.epsilon);
  return next;
}

void check_state_sizes(const CondensedQp& qp, const PrimalDual& s) {
  if (s.u.size() != qp.dim() || s.lambda.size() != qp.rows()) {
    throw DimensionError("primal-dual state does not match the QP dimensions");
  }
}

}  // namespace

void ReapConfig::validate() const {
  if (!(d_tau > 0.0)) throw InputError("d_tau must be positive");
  if (!(beta > 0.0)) throw InputError("beta must be positive");
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (!(psi > 0.0)) throw InputError("psi must be positive");
  if (!(dual_floor_margin >= 0.0)) throw InputError("dual_floor_margin must be nonnegative");
  if (const auto* f = std::get_if<FixedSigma>(&sigma_policy); f && !(f->value >= 0.0)) {
    throw InputError("fixed sigma must be nonnegative");
  }
  if (budget.max_iterations && *budget.max_iterations < 0) throw InputError("iteration budget must be >= 0");
  if (!budget.max_iterations && !budget.deadline) throw InputError("budget needs an iteration count or a deadline");
}

bool satisfies_invariants(const CondensedQp& qp, const PrimalDual& state, double epsilon,
                          double rel_tol) {
  if (state.u.size() != qp.dim() || state.lambda.size() != qp.rows()) return false;
  if (!state.u.allFinite() || !state.lambda.allFinite()) return false;
  const double limit = -epsilon * (1.0 - rel_tol);
  if (qp.rows() > 0 && qp.constraints.evaluate(state.u).maxCoeff() > limit) return false;
  if (qp.rows() > 0 && state.lambda.minCoeff() < epsilon * (1.0 - rel_tol)) return false;
  return true;
}

PrimalDual shift_warm_start(const PrimalDual& prev, const LtiModel& model, const Matrix& K,
                            const SteadyStateTarget& target, const Vector& x_t, int N,
                            double dual_floor) {
  const int p = model.p();
  if (prev.u.size() != N * p) throw DimensionError("warm start: previous sequence has the wrong size");
  PrimalDual w;
  w.u.resize(N * p);
  w.u.head((N - 1) * p) = prev.u.tail((N - 1) * p);
  Vector x = x_t;
  for (int k = 0; k < N - 1; ++k) x = model.A() * x + model.B() * w.u.segment(k * p, p);
  w.u.tail(p) = terminal_law(K, target, x);
  w.lambda = prev.lambda.cwiseMax(dual_floor);
  return w;
}

PrimalDual rollout_warm_start(const LtiModel& model, const Matrix& K, const SteadyStateTarget& target,
                              const Vector& x_t, int N, int rows) {
  return {terminal_rollout(model, K, target, x_t, N), Vector::Ones(rows)};
}

PrimalDual warm_start(const std::optional<PrimalDual>& prev, const LtiModel& model, const Matrix& K,
                      const SteadyStateTarget& target, const Vector& x_t, const CondensedQp& qp_t,
                      const ReapConfig& cfg) {
  const int N = qp_t.dim() / model.p();
  PrimalDual w = prev ? shift_warm_start(*prev, model, K, target, x_t, N,
                                         cfg.epsilon + cfg.dual_floor_margin)
                      : rollout_warm_start(model, K, target, x_t, N, qp_t.rows());
  if (!satisfies_invariants(qp_t, w, cfg.epsilon)) {
    throw InfeasibleWarmStartError(prev ? "shifted warm start violates the constraints"
                                        : "terminal-law rollout violates the constraints");
  }
  return w;
}

double primal_distance(const Vector& u, const Vector& eta, double gamma, double epsilon) {
  if (u.size() != eta.size()) throw DimensionError("primal_distance: size mismatch");
  return std::max(-(eta.dot(u) + gamma + epsilon) / eta.norm(), 0.0);
}

double dual_distance(double lambda, double epsilon) {
  if (lambda < epsilon) warn("dual iterate below the floor epsilon");
  return std::max(lambda - epsilon, 0.0);
}

double sigma_bound(const CondensedQp& qp, const PrimalDual& state, const ReapConfig& cfg) {
  check_state_sizes(qp, state);
  ReapConfig adaptive = cfg;
  if (!cfg.adaptive()) adaptive.sigma_policy = AdaptiveSigma{};
  return plan_step(qp, state, adaptive, row_geometry(qp)).sigma;
}

PrimalDual reap_step(const CondensedQp& qp, const PrimalDual& state, double sigma,
                     const ReapConfig& cfg) {
  check_state_sizes(qp, state);
  if (!(sigma >= 0.0)) throw InputError("reap_step: sigma must be nonnegative");
  const StepPlan plan = plan_step(qp, state, cfg, row_geometry(qp));
  return apply_step(state, plan, sigma, cfg);
}

double lyapunov_w(const PrimalDual& state, const OracleSolution& oracle) {
  return (state.u - oracle.u_dagger).squaredNorm() + (state.lambda - oracle.lambda_dagger).squaredNorm();
}

ReapResult run(const CondensedQp& qp, const PrimalDual& warm, const ReapConfig& cfg,
               const OracleSolution* oracle) {
  cfg.validate();
  check_state_sizes(qp, warm);
  if (cfg.adaptive() && !satisfies_invariants(qp, warm, cfg.epsilon, 1e-9)) {
    throw InfeasibleWarmStartError("run: warm start violates the solver invariants");
  }
  const RowGeometry geo = row_geometry(qp);
  const auto start = std::chrono::steady_clock::now();

  ReapResult result{warm, {}};
  SolveTrace& trace = result.trace;
  PrimalDual& state = result.state;
  if (oracle) trace.initial_lyapunov = lyapunov_w(state, *oracle);
  if (cfg.record_trace && cfg.budget.max_iterations) {
    trace.records.reserve(static_cast<size_t>(std::min<long>(*cfg.budget.max_iterations, 1 << 16)));
  }
  int streak = 0;
  while (true) {
    if (cfg.budget.max_iterations && trace.iterations >= *cfg.budget.max_iterations) break;
    if (cfg.budget.deadline && std::chrono::steady_clock::now() - start >= *cfg.budget.deadline) break;

    StepPlan plan;
    try {
      plan = plan_step(qp, state, cfg, geo);
    } catch (const BarrierDomainError&) {
      if (cfg.adaptive()) throw;
      trace.violation = true;
      trace.reason = StopReason::Violation;
      return result;
    }
    if (cfg.adaptive() && plan.sigma == 0.0 && cfg.stall_detection) {
      ++trace.iterations;
      if (cfg.record_trace) {
        TraceRecord rec{trace.iterations, 0.0, plan.eval.value, plan.min_delta_u, plan.min_delta_lambda,
                        std::nullopt};
        if (oracle) rec.lyapunov = lyapunov_w(state, *oracle);
        trace.records.push_back(rec);
      }
      trace.stalled = true;
      trace.reason = StopReason::Stall;
      return result;
    }
    PrimalDual next = apply_step(state, plan, plan.sigma, cfg);
    const double change = (next.u - state.u).norm() + (next.lambda - state.lambda).norm();
    state = std::move(next);
    ++trace.iterations;
    if (cfg.record_trace) {
      TraceRecord rec{trace.iterations, plan.sigma, plan.eval.value, plan.min_delta_u,
                      plan.min_delta_lambda, std::nullopt};
      if (oracle) rec.lyapunov = lyapunov_w(state, *oracle);
      trace.records.push_back(rec);
    }
    if (!state.u.allFinite() || !state.lambda.allFinite()) {
      if (cfg.adaptive()) throw NumericalError("run: iterate became non-finite");
      trace.violation = true;
      trace.reason = StopReason::Violation;
      return result;
    }
    if (cfg.early_exit) {
      streak = change <= cfg.convergence_tol ? streak + 1 : 0;
      if (streak >= kConvergedStreak) {
        trace.converged = true;
        trace.reason = StopReason::Converged;
        return result;
      }
    }
  }
  trace.reason = StopReason::Budget;
  return result;
}

void write_trace_csv(std::ostream& os, const SolveTrace& trace) {
  os << "tau,sigma,barrier,min_delta_u,min_delta_lambda,W\n";
  os << std::setprecision(17);
  for (const auto& r : trace.records) {
    os << r.tau << ',' << r.sigma << ',' << r.barrier << ',' << r.min_delta_u << ','
       << r.min_delta_lambda << ',';
    if (r.lyapunov) os << *r.lyapunov;
    os << '\n';
  }
}

}  // namespace reap
