// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#include "reap/barrier.hpp"

#include <cmath>
#include <sstream>

#include "reap/errors.hpp"

namespace reap {
namespace {

void check_sizes(const CondensedQp& qp, const Vector& u, const Vector* lambda) {
  if (u.size() != qp.dim()) throw DimensionError("barrier: u has the wrong size");
  if (lambda && lambda->size() != qp.rows()) throw DimensionError("barrier: lambda has the wrong size");
}

}  // namespace

Vector log_arguments(const CondensedQp& qp, const Vector& u) {
  check_sizes(qp, u, nullptr);
  Vector args = -qp.beta * qp.constraints.evaluate(u);
  for (int i = 0; i < args.size(); ++i) {
    if (!(args(i) > 0.0) || !std::isfinite(args(i))) {
      std::ostringstream os;
      os << "barrier: log argument of row " << i << " is " << args(i) << " (iterate outside the domain)";
      throw BarrierDomainError(os.str());
    }
  }
  return args;
}

double barrier_value(const CondensedQp& qp, const Vector& u, const Vector& lambda) {
  check_sizes(qp, u, &lambda);
  const Vector args = log_arguments(qp, u);
  return qp.cost(u) - lambda.dot(args.array().log().matrix());
}

Vector grad_u(const CondensedQp& qp, const Vector& u, const Vector& lambda) {
  check_sizes(qp, u, &lambda);
  const Vector args = log_arguments(qp, u);
  const Vector w = qp.beta * lambda.cwiseQuotient(args);
  return 2.0 * (qp.H * u + qp.f) + qp.constraints.normals().transpose() * w;
}

Vector grad_lambda(const CondensedQp& qp, const Vector& u) {
  return -log_arguments(qp, u).array().log().matrix();
}

BarrierEval evaluate_barrier(const CondensedQp& qp, const Vector& u, const Vector& lambda) {
  check_sizes(qp, u, &lambda);
  BarrierEval e;
  e.log_args = log_arguments(qp, u);
  e.grad_lambda = -e.log_args.array().log().matrix();
  const Vector Hu = qp.H * u;
  e.value = u.dot(Hu) + 2.0 * qp.f.dot(u) + qp.const_term + lambda.dot(e.grad_lambda);
  e.grad_u = 2.0 * (Hu + qp.f) +
             qp.constraints.normals().transpose() * (qp.beta * lambda.cwiseQuotient(e.log_args));
  return e;
}

Vector projection_phi(const Vector& lambda, const Vector& g, double floor) {
  if (lambda.size() != g.size()) throw DimensionError("projection_phi: size mismatch");
  Vector phi = Vector::Zero(g.size());
  for (int i = 0; i < g.size(); ++i) {
    if (lambda(i) <= floor && g(i) < 0.0) phi(i) = -g(i);
  }
  return phi;
}

}  // namespace reap
