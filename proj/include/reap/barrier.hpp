// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "reap/condensed_qp.hpp"

namespace reap {

/// Modified barrier B(u, lambda) = cost(u) - sum_i lambda_i log(-beta(eta_i'u + gamma_i + 1/beta) + 1)
/// with gamma_i the offsets of the QP it is evaluated on and beta = qp.beta.
struct BarrierEval {
  double value = 0.0;
  Vector grad_u;
  Vector grad_lambda;
  Vector log_args;
};

/// Per-row log arguments -beta (eta_i'u + gamma_i). Throws BarrierDomainError
/// when any is nonpositive (or not finite).
Vector log_arguments(const CondensedQp& qp, const Vector& u);

double barrier_value(const CondensedQp& qp, const Vector& u, const Vector& lambda);
Vector grad_u(const CondensedQp& qp, const Vector& u, const Vector& lambda);
Vector grad_lambda(const CondensedQp& qp, const Vector& u);
BarrierEval evaluate_barrier(const CondensedQp& qp, const Vector& u, const Vector& lambda);

/// Projection term of the dual dynamics. Entry i is -g_i when lambda_i <= floor
/// and g_i < 0, and zero otherwise. With floor = 0 this is the plain
/// nonnegativity projection.
Vector projection_phi(const Vector& lambda, const Vector& g, double floor = 0.0);

}  // namespace reap
