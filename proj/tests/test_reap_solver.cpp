#include "doctest.h"
#include "test_support.hpp"

using namespace reap;
using reap::testing::prepared;
using reap::testing::random_state;
using reap::testing::uniform_vector;

namespace {

CondensedQp double_integrator_qp() {
  const auto& ps = prepared("double_integrator");
  return ps.mpc->at(ps.scenario.x0);
}

ReapConfig quiet(long budget) {
  ReapConfig cfg;
  cfg.budget = Budget::iterations(budget);
  cfg.record_trace = false;
  return cfg;
}

}  // namespace

TEST_CASE("primal distance examples") {
  Vector eta(2), u = Vector::Zero(2);
  eta << 1, 0;
  CHECK(primal_distance(u, eta, -5.0, 0.01) == doctest::Approx(4.99));
  u << 4.99, 0;
  CHECK(primal_distance(u, eta, -5.0, 0.01) == doctest::Approx(0.0));
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const Vector e = uniform_vector(rng, 3, -1, 1);
    const Vector x = uniform_vector(rng, 3, -1, 1);
    const double gamma = -5.0, eps = 1e-3;
    const double d = primal_distance(x, e, gamma, eps);
    if (d > 0) CHECK(std::abs(d * e.norm() + e.dot(x) + gamma + eps) < 1e-12);
  }
}

TEST_CASE("dual distance examples") {
  CHECK(dual_distance(1e-6, 1e-6) == 0.0);
  CHECK(dual_distance(1.0, 0.01) == doctest::Approx(0.99));
  int warnings = 0;
  auto old = set_warning_sink([&](std::string_view) { ++warnings; });
  CHECK(dual_distance(1e-7, 1e-6) == 0.0);
  set_warning_sink(old);
  CHECK(warnings == 1);
}

TEST_CASE("sigma is zero on the shifted hyperplane") {
  CondensedQp qp;
  qp.H = Matrix::Identity(1, 1);
  qp.f = Vector::Zero(1);
  // Powers of two keep the row value exactly on the shifted hyperplane.
  qp.beta = 1024.0;
  const double eps = std::ldexp(1.0, -20);
  qp.constraints = HalfspaceSet(Matrix::Ones(1, 1), Vector::Constant(1, -1.0));
  PrimalDual s{Vector::Constant(1, 1.0 - eps), Vector::Ones(1)};
  ReapConfig cfg;
  cfg.epsilon = eps;
  CHECK(sigma_bound(qp, s, cfg) == 0.0);
  // Stepping with sigma = 0 leaves the state unchanged.
  const PrimalDual next = reap_step(qp, s, 0.0, cfg);
  CHECK((next.u - s.u).norm() == 0.0);
  CHECK((next.lambda - s.lambda).norm() == 0.0);
}

TEST_CASE("psi floor sets the primal bound when the gradient vanishes") {
  CondensedQp qp;
  qp.H = Matrix::Identity(1, 1);
  qp.f = Vector::Constant(1, -0.5);  // grad_u = 2f + beta*lambda/arg = -1 + 1 = 0 at u = 0
  qp.beta = 1.0;
  qp.constraints = HalfspaceSet(Matrix::Ones(1, 1), Vector::Constant(1, -1.0));
  PrimalDual s{Vector::Zero(1), Vector::Ones(1)};
  ReapConfig cfg;
  cfg.sigma_policy = AdaptiveSigma{false};
  CHECK(grad_u(qp, s.u, s.lambda).norm() < 1e-15);
  const double d = 1.0 - cfg.epsilon;
  CHECK(sigma_bound(qp, s, cfg) == doctest::Approx(d / (cfg.d_tau * cfg.psi)).epsilon(1e-8));
}

TEST_CASE("short row normals do not let the primal step overshoot") {
  // Row 0.1*u <= 0.1 with a large gradient pushing into it. The bound must
  // budget for the row slack 0.1*du rather than the distance du.
  CondensedQp qp;
  qp.H = Matrix::Identity(1, 1);
  qp.f = Vector::Constant(1, -50.0);
  qp.beta = 1.0;
  qp.constraints = HalfspaceSet(Matrix::Constant(1, 1, 0.1), Vector::Constant(1, -0.1));
  PrimalDual s{Vector::Constant(1, 0.5), Vector::Constant(1, 1e-3)};
  ReapConfig cfg;
  cfg.sigma_policy = AdaptiveSigma{false};
  const double sigma = sigma_bound(qp, s, cfg);
  const double du = primal_distance(s.u, qp.constraints.normals().row(0).transpose(),
                                    qp.constraints.offsets()(0), cfg.epsilon);
  const double g = grad_u(qp, s.u, s.lambda).norm();
  CHECK(sigma == doctest::Approx((1.0 - 1e-9) * du / (cfg.d_tau * g)).epsilon(1e-12));
  const PrimalDual next = reap_step(qp, s, sigma, cfg);
  CHECK(satisfies_invariants(qp, next, cfg.epsilon, 1e-9));
}

TEST_CASE("curvature cap bounds the step on a weakly active row") {
  // Row u <= 1 at arg = 1 with a small multiplier: the (u, lambda) pair
  // rotates with frequency beta, so the step must stay below a/b.
  CondensedQp qp;
  qp.H = Matrix::Identity(1, 1);
  qp.beta = 1e4;
  qp.constraints = HalfspaceSet(Matrix::Ones(1, 1), Vector::Constant(1, -1.0));
  const double u = 1.0 - 1e-4;
  const double lam = 2e-6;
  qp.f = Vector::Constant(1, -0.5 * qp.beta * lam - u);  // grad_u = 0
  PrimalDual s{Vector::Constant(1, u), Vector::Constant(1, lam)};
  ReapConfig cfg;
  CHECK(std::abs(grad_u(qp, s.u, s.lambda)(0)) < 1e-9);
  const double b = qp.beta * qp.beta;
  const double a = 2.0 + lam * b;
  CHECK(sigma_bound(qp, s, cfg) == doctest::Approx(a / (b * cfg.d_tau)).epsilon(1e-6));
  cfg.sigma_policy = AdaptiveSigma{false};
  CHECK(sigma_bound(qp, s, cfg) > 1e3 * a / (b * cfg.d_tau));
}

TEST_CASE("one adaptive step preserves the invariants") {
  std::mt19937_64 rng(2);
  for (const char* name : {"double_integrator", "bebop", "bebop_state_constraints"}) {
    const auto& ps = prepared(name);
    const CondensedQp qp = ps.mpc->at(ps.scenario.x0);
    ReapConfig cfg;
    for (int t = 0; t < 300; ++t) {
      const PrimalDual s = random_state(qp, cfg.epsilon, rng);
      REQUIRE(satisfies_invariants(qp, s, cfg.epsilon));
      const double sigma = sigma_bound(qp, s, cfg);
      CHECK(sigma >= 0.0);
      const PrimalDual next = reap_step(qp, s, sigma, cfg);
      CAPTURE(name);
      CHECK(satisfies_invariants(qp, next, cfg.epsilon, 1e-9));
    }
  }
}

TEST_CASE("zero budget returns the warm start") {
  const CondensedQp qp = double_integrator_qp();
  std::mt19937_64 rng(3);
  const PrimalDual w = random_state(qp, 1e-6, rng);
  const ReapResult r = run(qp, w, quiet(0));
  CHECK((r.state.u - w.u).norm() == 0.0);
  CHECK((r.state.lambda - w.lambda).norm() == 0.0);
  CHECK(r.trace.iterations == 0);
  CHECK(r.trace.records.empty());
}

TEST_CASE("run rejects an infeasible warm start") {
  const CondensedQp qp = double_integrator_qp();
  PrimalDual w{Vector::Constant(qp.dim(), 100.0), Vector::Ones(qp.rows())};
  CHECK_THROWS_AS(run(qp, w, quiet(10)), InfeasibleWarmStartError);
  ReapConfig bad = quiet(10);
  bad.d_tau = 0.0;
  std::mt19937_64 rng(4);
  CHECK_THROWS_AS(run(qp, random_state(qp, 1e-6, rng), bad), InputError);
}

TEST_CASE("run converges to the oracle on the double integrator scenario") {
  const auto& ps = prepared("double_integrator");
  const CondensedQp qp = ps.mpc->at(ps.scenario.x0);
  const OracleSolution o = solve_exact(qp);
  const PrimalDual w = rollout_warm_start(ps.scenario.model, ps.mpc->terminal().K, ps.target, ps.scenario.x0,
                                          ps.mpc->horizon(), qp.rows());
  const ReapResult r = run(qp, w, quiet(100000));
  CHECK((r.state.u - o.u_dagger).norm() <= 1e-4);
  CHECK(satisfies_invariants(qp, r.state, 1e-6, 1e-9));
}

TEST_CASE("oracle state is a fixed point of the iteration") {
  const CondensedQp qp = double_integrator_qp();
  const OracleSolution o = solve_exact(qp);
  ReapConfig cfg;
  cfg.sigma_policy = FixedSigma{1.0};
  const PrimalDual s{o.u_dagger, o.lambda_dagger};
  const PrimalDual next = reap_step(qp, s, 1.0, cfg);
  CHECK((next.u - s.u).norm() + (next.lambda - s.lambda).norm() <= 1e-6);
  CHECK(lyapunov_w(s, o) == 0.0);
}

TEST_CASE("trace records and stall semantics") {
  const auto& ps = prepared("double_integrator");
  const CondensedQp qp = ps.mpc->at(ps.scenario.x0);
  std::mt19937_64 rng(5);
  PrimalDual w = random_state(qp, 1e-6, rng);
  ReapConfig cfg;
  cfg.budget = Budget::iterations(50);
  cfg.early_exit = false;
  const OracleSolution o = solve_exact(qp);
  const ReapResult r = run(qp, w, cfg, &o);
  REQUIRE(r.trace.records.size() == static_cast<size_t>(r.trace.iterations));
  CHECK(r.trace.initial_lyapunov.has_value());
  for (const auto& rec : r.trace.records) CHECK(rec.lyapunov.has_value());
  std::ostringstream os;
  write_trace_csv(os, r.trace);
  CHECK(os.str().rfind("tau,sigma,barrier,min_delta_u,min_delta_lambda,W\n", 0) == 0);

  // Start exactly on a shifted hyperplane: the first sigma is zero and the solve freezes.
  const Vector row = qp.constraints.normals().row(0).transpose();
  const double value = row.dot(w.u) + qp.constraints.offsets()(0);
  w.u += row * ((-cfg.epsilon - value) / row.squaredNorm());
  if (satisfies_invariants(qp, w, cfg.epsilon, 1e-9) && sigma_bound(qp, w, cfg) == 0.0) {
    const ReapResult s = run(qp, w, cfg);
    CHECK(s.trace.stalled);
    CHECK(s.trace.reason == StopReason::Stall);
    CHECK((s.state.u - w.u).norm() == 0.0);
  }
}

TEST_CASE("deadline budget stops the solve") {
  const CondensedQp qp = double_integrator_qp();
  std::mt19937_64 rng(6);
  ReapConfig cfg;
  cfg.budget = Budget::time(std::chrono::milliseconds(5));
  cfg.early_exit = false;
  cfg.record_trace = false;
  const ReapResult r = run(qp, random_state(qp, 1e-6, rng), cfg);
  CHECK(r.trace.reason == StopReason::Budget);
  CHECK(r.trace.iterations > 0);
  CHECK(satisfies_invariants(qp, r.state, 1e-6, 1e-9));
}

TEST_CASE("fixed sigma records leaving the domain as a violation") {
  const auto& ps = prepared("bebop");
  const CondensedQp qp = ps.mpc->at(ps.scenario.x0);
  int repairs = 0;
  const PrimalDual w = initial_iterate(*ps.mpc, qp, ps.scenario.reap, std::nullopt, ps.scenario.x0, repairs);
  ReapConfig cfg = quiet(200);
  cfg.sigma_policy = FixedSigma{0.5};
  const ReapResult r = run(qp, w, cfg);
  CHECK(r.trace.violation);
  CHECK(r.trace.reason == StopReason::Violation);
}

TEST_CASE("warm start at the equilibrium is the stacked steady input") {
  const auto& ps = prepared("bebop");
  const int N = ps.mpc->horizon(), p = ps.scenario.model.p();
  const CondensedQp qp = ps.mpc->at(ps.target.x_bar);
  PrimalDual prev{ps.target.u_bar.replicate(N, 1), Vector::Ones(qp.rows())};
  const PrimalDual w = warm_start(prev, ps.scenario.model, ps.mpc->terminal().K, ps.target, ps.target.x_bar, qp,
                                  ps.scenario.reap);
  for (int k = 0; k < N; ++k) CHECK((w.u.segment(k * p, p) - ps.target.u_bar).norm() < 1e-14);
  // Duals are floored at epsilon plus the margin.
  PrimalDual low = prev;
  low.lambda.setZero();
  const PrimalDual w2 = shift_warm_start(low, ps.scenario.model, ps.mpc->terminal().K, ps.target, ps.target.x_bar,
                                         N, 2e-6);
  CHECK(w2.lambda.minCoeff() == doctest::Approx(2e-6));
}

TEST_CASE("double integrator rollout warm start is feasible at the initial state") {
  const auto& ps = prepared("double_integrator");
  const CondensedQp qp = ps.mpc->at(ps.scenario.x0);
  const PrimalDual w = warm_start(std::nullopt, ps.scenario.model, ps.mpc->terminal().K, ps.target, ps.scenario.x0,
                                  qp, ps.scenario.reap);
  CHECK(satisfies_invariants(qp, w, ps.scenario.reap.epsilon));
}

TEST_CASE("long adaptive solve on the drone keeps every iterate feasible") {
  const auto& ps = prepared("bebop");
  const CondensedQp qp = ps.mpc->at(ps.scenario.x0);
  int repairs = 0;
  PrimalDual s = initial_iterate(*ps.mpc, qp, ps.scenario.reap, std::nullopt, ps.scenario.x0, repairs);
  ReapConfig cfg = quiet(1);
  for (int k = 0; k < 500; ++k) {
    s = run(qp, s, cfg).state;
    REQUIRE(satisfies_invariants(qp, s, cfg.epsilon, 1e-9));
  }
}
