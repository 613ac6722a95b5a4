// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "reap/lti_model.hpp"

namespace reap {

enum class LpStatus { Optimal, Unbounded, Infeasible };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;  // objective at z (only meaningful when Optimal)
  Vector z;
  int iterations = 0;
};

/// Dense two-phase tableau simplex with Bland's rule.
/// Solves  max c'z  subject to  A z <= b  with z free.
LpResult maximize(const Vector& c, const Matrix& A, const Vector& b, int max_iterations = 200000);

struct ChebyshevBall {
  Vector center;
  /// Radius of the largest inscribed ball, clipped at radius_cap. Negative
  /// when the polytope is empty.
  double radius = 0.0;
};

/// Largest ball inside { z : normals z + offsets <= 0 }.
ChebyshevBall chebyshev_center(const HalfspaceSet& set, double radius_cap = 1.0);

}  // namespace reap

#include <random>
#include <vector>

namespace reap {

/// Hit-and-run samples from the interior of a polytope, started at its
/// Chebyshev center. Chords along unbounded directions are clipped at
/// +-chord_cap. Throws InfeasibleProblemError when the polytope has no interior.
std::vector<Vector> sample_polytope(const HalfspaceSet& set, int count, std::mt19937_64& rng,
                                    int thinning = 10, double chord_cap = 1e3);

}  // namespace reap
