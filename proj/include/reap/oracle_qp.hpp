// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "reap/condensed_qp.hpp"

namespace reap {

/// Reference solution of the QP restricted to the unit level set of the
/// modified barrier, { u : eta_i'u + gamma_i + 1/beta <= 0 } for the offsets
/// gamma_i of the QP it is given. This is the saddle point REAP converges to.
struct OracleSolution {
  Vector u_dagger;
  /// Multipliers in the barrier convention: lambda_i = z_i * log_arg_i / beta.
  Vector lambda_dagger;
  /// Standard KKT multipliers of the inequality rows.
  Vector multipliers;
  double kkt_residual = 0.0;
  int iterations = 0;
};

struct IpmOptions {
  double tolerance = 1e-10;
  int max_iterations = 200;
};

struct IpmResult {
  Vector x;
  Vector z;
  Vector s;
  int iterations = 0;
};

/// Primal-dual interior point (Mehrotra predictor-corrector) for
/// min 1/2 x'Px + q'x  s.t.  Gx <= h, with P positive definite.
/// Throws NumericalError when the iteration limit is reached.
IpmResult solve_ipm(const Matrix& P, const Vector& q, const Matrix& G, const Vector& h,
                    const IpmOptions& options = {});

/// Largest t such that some u satisfies normals u + offsets + t <= 0
/// (clipped at cap).
double interior_depth(const HalfspaceSet& set, double cap = 1.0);

/// Throws InfeasibleProblemError when the level set has no interior.
OracleSolution solve_exact(const CondensedQp& qp, const IpmOptions& options = {});

/// Stationarity, primal feasibility, complementarity and dual sign violations
/// (infinity norms, summed) of the level-set QP at (u, z) with standard
/// multipliers z.
double kkt_residual(const CondensedQp& qp, const Vector& u, const Vector& z);

/// Closest point to target satisfying normals u + offsets + margin <= 0.
/// Throws InfeasibleProblemError when that set is empty.
Vector project_feasible(const HalfspaceSet& set, const Vector& target, double margin);

}  // namespace reap
