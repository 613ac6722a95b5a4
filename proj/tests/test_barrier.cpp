#include "doctest.h"
#include "test_support.hpp"

using namespace reap;
using reap::testing::prepared;
using reap::testing::random_feasible_u;
using reap::testing::random_state;

namespace {

CondensedQp one_row_qp(double eta, double gamma, double beta, double h = 1.0, double f = 0.0) {
  CondensedQp qp;
  qp.H = Matrix::Constant(1, 1, h);
  qp.f = Vector::Constant(1, f);
  qp.constraints = HalfspaceSet(Matrix::Constant(1, 1, eta), Vector::Constant(1, gamma));
  qp.beta = beta;
  return qp;
}

CondensedQp double_integrator_qp() {
  const auto& ps = prepared("double_integrator");
  return ps.mpc->at(ps.scenario.x0);
}

// Literal per-term evaluation of the modified barrier.
double literal_barrier(const CondensedQp& qp, const Vector& u, const Vector& lambda) {
  double v = u.dot(qp.H * u) + 2.0 * qp.f.dot(u) + qp.const_term;
  for (int i = 0; i < qp.rows(); ++i) {
    const double row = qp.constraints.normals().row(i).dot(u) + qp.constraints.offsets()(i);
    v -= lambda(i) * std::log(-qp.beta * row);
  }
  return v;
}

}  // namespace

TEST_CASE("barrier with zero multipliers is the quadratic cost") {
  const CondensedQp qp = double_integrator_qp();
  std::mt19937_64 rng(1);
  const Vector u = random_feasible_u(qp, 1e-6, rng);
  CHECK(barrier_value(qp, u, Vector::Zero(qp.rows())) == doctest::Approx(qp.cost(u)).epsilon(1e-14));
}

TEST_CASE("unit log argument contributes nothing") {
  const double beta = 1e4;
  // eta u + gamma = -1/beta at u = 0.
  const CondensedQp qp = one_row_qp(1.0, -1.0 / beta, beta, 2.0, 0.3);
  const Vector u = Vector::Zero(1);
  CHECK(log_arguments(qp, u)(0) == doctest::Approx(1.0));
  for (double lam : {0.0, 1.0, 17.0}) CHECK(barrier_value(qp, u, Vector::Constant(1, lam)) == doctest::Approx(qp.cost(u)));
  CHECK(std::abs(grad_lambda(qp, u)(0)) < 1e-12);
}

TEST_CASE("barrier matches a literal evaluation") {
  const CondensedQp qp = double_integrator_qp();
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const PrimalDual s = random_state(qp, 1e-6, rng);
    const double lit = literal_barrier(qp, s.u, s.lambda);
    CHECK(std::abs(barrier_value(qp, s.u, s.lambda) - lit) <= 1e-12 * std::max(1.0, std::abs(lit)));
    const BarrierEval e = evaluate_barrier(qp, s.u, s.lambda);
    CHECK(std::abs(e.value - lit) <= 1e-12 * std::max(1.0, std::abs(lit)));
    CHECK((e.grad_u - grad_u(qp, s.u, s.lambda)).norm() <= 1e-12 * std::max(1.0, e.grad_u.norm()));
  }
}

TEST_CASE("barrier domain errors") {
  const CondensedQp qp = one_row_qp(1.0, -1.0, 10.0);
  CHECK_THROWS_AS(log_arguments(qp, Vector::Constant(1, 1.0)), BarrierDomainError);
  CHECK_THROWS_AS(barrier_value(qp, Vector::Constant(1, 2.0), Vector::Ones(1)), BarrierDomainError);
  CHECK_THROWS_AS(grad_u(qp, Vector::Zero(2), Vector::Ones(1)), DimensionError);
}

TEST_CASE("grad_u of the pure quadratic") {
  const CondensedQp qp = double_integrator_qp();
  const Vector lam0 = Vector::Zero(qp.rows());
  const Vector u_free = -qp.H.ldlt().solve(qp.f);
  // The unconstrained minimizer may be infeasible; the pure quadratic gradient does not need the rows there.
  CondensedQp free = qp;
  free.constraints = HalfspaceSet::unconstrained(qp.dim());
  CHECK(grad_u(free, u_free, Vector::Zero(0)).norm() < 1e-10);
  std::mt19937_64 rng(3);
  const Vector u = random_feasible_u(qp, 1e-6, rng);
  CHECK((grad_u(qp, u, lam0) - 2.0 * (qp.H * u + qp.f)).norm() < 1e-12);
}

TEST_CASE("grad_u matches central differences") {
  for (const char* name : {"double_integrator", "bebop", "bebop_state_constraints"}) {
    const auto& ps = prepared(name);
    const CondensedQp qp = ps.mpc->at(ps.scenario.x0);
    std::mt19937_64 rng(4);
    for (int t = 0; t < 20; ++t) {
      const PrimalDual s = random_state(qp, 1e-6, rng);
      const Vector g = grad_u(qp, s.u, s.lambda);
      const Vector args = log_arguments(qp, s.u);
      // Step small against the smallest row slack so both probes stay in the domain.
      const double slack = (args / qp.beta).minCoeff();
      Vector fd(qp.dim());
      for (int j = 0; j < qp.dim(); ++j) {
        const double h = std::min(1e-6, 1e-3 * slack / std::max(1.0, qp.constraints.normals().col(j).cwiseAbs().maxCoeff()));
        Vector up = s.u, dn = s.u;
        up(j) += h;
        dn(j) -= h;
        fd(j) = (barrier_value(qp, up, s.lambda) - barrier_value(qp, dn, s.lambda)) / (2.0 * h);
      }
      CAPTURE(name);
      CHECK((fd - g).norm() <= 1e-5 * std::max(1.0, g.norm()));
    }
  }
}

TEST_CASE("grad_lambda entries and finite differences") {
  const double beta = 1e4;
  CHECK(grad_lambda(one_row_qp(1.0, -1.0 / beta, beta), Vector::Zero(1))(0) == doctest::Approx(0.0));
  CHECK(grad_lambda(one_row_qp(1.0, -1e6, beta), Vector::Zero(1))(0) < -20.0);
  const CondensedQp qp = double_integrator_qp();
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const PrimalDual s = random_state(qp, 1e-6, rng);
    const Vector g = grad_lambda(qp, s.u);
    for (int i = 0; i < qp.rows(); ++i) {
      Vector up = s.lambda, dn = s.lambda;
      up(i) += 1e-3;
      dn(i) -= 1e-3;
      const double fd = (barrier_value(qp, s.u, up) - barrier_value(qp, s.u, dn)) / 2e-3;
      CHECK(std::abs(fd - g(i)) <= 1e-6 * std::max(1.0, std::abs(g(i))));
    }
  }
}

TEST_CASE("projection operator case split") {
  Vector lam(3), g(3);
  lam << 1, 0, 0;
  g << -5, 2, -3;
  Vector expect(3);
  expect << 0, 0, 3;
  CHECK((projection_phi(lam, g) - expect).norm() == 0.0);
  CHECK(projection_phi(Vector::Constant(3, 0.1), g).norm() == 0.0);
  CHECK(projection_phi(Vector::Zero(3), Vector::Constant(3, 2.0)).norm() == 0.0);
  // With a positive floor the same split applies relative to the floor.
  lam << 1e-6, 2e-6, 1e-6;
  expect << 5, 0, 3;
  CHECK((projection_phi(lam, g, 1e-6) - expect).norm() == 0.0);
}

TEST_CASE("barrier is convex in u along random segments") {
  const CondensedQp qp = double_integrator_qp();
  std::mt19937_64 rng(6);
  for (int t = 0; t < 50; ++t) {
    const PrimalDual a = random_state(qp, 1e-6, rng);
    const Vector b = random_feasible_u(qp, 1e-6, rng);
    const Vector mid = 0.5 * (a.u + b);
    const double lhs = barrier_value(qp, mid, a.lambda);
    const double rhs = 0.5 * (barrier_value(qp, a.u, a.lambda) + barrier_value(qp, b, a.lambda));
    CHECK(lhs <= rhs + 1e-9 * std::max(1.0, std::abs(rhs)));
  }
}
