// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

namespace reap {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Polytope { z : normals * z + offsets <= 0 }. Row i of `normals` is the
/// normal of constraint i.
class HalfspaceSet {
 public:
  HalfspaceSet() = default;
  /// Throws DimensionError on mismatched sizes and InputError on a zero or
  /// non-finite normal.
  HalfspaceSet(Matrix normals, Vector offsets);

  /// Set with no constraints over R^dim.
  static HalfspaceSet unconstrained(int dim);
  /// Box lower <= z <= upper. Infinite bounds produce no row.
  static HalfspaceSet box(const Vector& lower, const Vector& upper);

  int dim() const { return static_cast<int>(normals_.cols()); }
  int size() const { return static_cast<int>(normals_.rows()); }
  bool empty() const { return normals_.rows() == 0; }

  const Matrix& normals() const { return normals_; }
  const Vector& offsets() const { return offsets_; }

  /// normals * z + offsets.
  Vector evaluate(const Vector& z) const;
  /// Largest row value (-inf for an empty set).
  double max_violation(const Vector& z) const;
  bool contains(const Vector& z, double tol = 0.0) const;

  /// Same normals, offsets replaced.
  HalfspaceSet with_offsets(Vector offsets) const;
  /// Rows of *this followed by rows of other.
  HalfspaceSet append(const HalfspaceSet& other) const;

 private:
  Matrix normals_;
  Vector offsets_;
};

/// x(t+1) = A x(t) + B u(t), y(t) = C x(t) + D u(t).
class LtiModel {
 public:
  LtiModel() = default;

  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  const Matrix& C() const { return C_; }
  const Matrix& D() const { return D_; }
  int n() const { return static_cast<int>(A_.rows()); }
  int p() const { return static_cast<int>(B_.cols()); }
  int m() const { return static_cast<int>(C_.rows()); }

  bool stabilizable() const { return stabilizable_; }
  bool detectable() const { return detectable_; }

 private:
  friend LtiModel validate_model(const Matrix&, const Matrix&, const Matrix&, const Matrix&);
  Matrix A_, B_, C_, D_;
  bool stabilizable_ = false;
  bool detectable_ = false;
};

/// Checks shapes and finiteness. A failed PBH stabilizability or
/// detectability test is reported through warn(), not as an error.
LtiModel validate_model(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D);

/// PBH test: rank [A - lambda I, B] = n for every eigenvalue with |lambda| >= 1.
bool is_stabilizable(const Matrix& A, const Matrix& B, double tol = 1e-9);
/// PBH test: rank [A - lambda I; C] = n for every eigenvalue with |lambda| >= 1.
bool is_detectable(const Matrix& A, const Matrix& C, double tol = 1e-9);

struct SteadyStateTarget {
  Vector x_bar;
  Vector u_bar;
  Vector reference;
};

/// Minimum-norm solution of x = A x + B u, r = C x + D u.
/// Throws NoSteadyStateError when the residual exceeds tol * (1 + |r|).
SteadyStateTarget steady_state_target(const LtiModel& model, const Vector& r, double tol = 1e-9);

/// ||x - A x - B u|| + ||r - C x - D u||.
double steady_state_residual(const LtiModel& model, const SteadyStateTarget& target);

/// Shrinks a polytope by the factor (1 - margin). Offsets are scaled when the
/// origin is strictly inside; otherwise each halfspace is pulled toward the
/// Chebyshev center. Throws InfeasibleProblemError for an empty polytope.
HalfspaceSet shrink(const HalfspaceSet& set, double margin);

/// x_bar in (1 - margin) X and u_bar in (1 - margin) U.
bool is_strictly_admissible(const SteadyStateTarget& target, const HalfspaceSet& X,
                            const HalfspaceSet& U, double margin);

struct StepResult {
  Vector x_next;
  Vector y;
};

StepResult step(const LtiModel& model, const Vector& x, const Vector& u);

/// Spectral radius of a square matrix.
double spectral_radius(const Matrix& M);

}  // namespace reap
