// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#include "reap/lti_model.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "reap/errors.hpp"
#include "reap/linear_program.hpp"
#include "reap/log.hpp"

namespace reap {

HalfspaceSet::HalfspaceSet(Matrix normals, Vector offsets)
    : normals_(std::move(normals)), offsets_(std::move(offsets)) {
  if (normals_.rows() != offsets_.size()) {
    throw DimensionError("HalfspaceSet: " + std::to_string(normals_.rows()) + " normals but " +
                         std::to_string(offsets_.size()) + " offsets");
  }
  if (!normals_.allFinite() || !offsets_.allFinite()) {
    throw InputError("HalfspaceSet: non-finite entry");
  }
  for (int i = 0; i < normals_.rows(); ++i) {
    if (normals_.row(i).squaredNorm() == 0.0) {
      throw InputError("HalfspaceSet: normal " + std::to_string(i) + " is zero");
    }
  }
}

HalfspaceSet HalfspaceSet::unconstrained(int dim) {
  return HalfspaceSet(Matrix::Zero(0, dim), Vector::Zero(0));
}

HalfspaceSet HalfspaceSet::box(const Vector& lower, const Vector& upper) {
  if (lower.size() != upper.size()) throw DimensionError("HalfspaceSet::box: bound sizes differ");
  const int d = static_cast<int>(lower.size());
  int rows = 0;
  for (int i = 0; i < d; ++i) {
    if (lower(i) > upper(i)) throw InputError("HalfspaceSet::box: lower bound above upper bound");
    rows += std::isfinite(upper(i)) + std::isfinite(lower(i));
  }
  Matrix normals = Matrix::Zero(rows, d);
  Vector offsets(rows);
  int r = 0;
  for (int i = 0; i < d; ++i) {
    if (std::isfinite(upper(i))) {
      normals(r, i) = 1.0;
      offsets(r++) = -upper(i);
    }
    if (std::isfinite(lower(i))) {
      normals(r, i) = -1.0;
      offsets(r++) = lower(i);
    }
  }
  return HalfspaceSet(std::move(normals), std::move(offsets));
}

Vector HalfspaceSet::evaluate(const Vector& z) const {
  if (z.size() != dim()) throw DimensionError("HalfspaceSet::evaluate: point has wrong dimension");
  return normals_ * z + offsets_;
}

double HalfspaceSet::max_violation(const Vector& z) const {
  if (empty()) return -std::numeric_limits<double>::infinity();
  return evaluate(z).maxCoeff();
}

bool HalfspaceSet::contains(const Vector& z, double tol) const { return max_violation(z) <= tol; }

HalfspaceSet HalfspaceSet::with_offsets(Vector offsets) const {
  return HalfspaceSet(normals_, std::move(offsets));
}

HalfspaceSet HalfspaceSet::append(const HalfspaceSet& other) const {
  if (other.dim() != dim()) throw DimensionError("HalfspaceSet::append: dimensions differ");
  Matrix normals(size() + other.size(), dim());
  normals << normals_, other.normals_;
  Vector offsets(size() + other.size());
  offsets << offsets_, other.offsets_;
  return HalfspaceSet(std::move(normals), std::move(offsets));
}

namespace {

// Rank of [A - lambda I, B] (or its transpose pair) at unstable eigenvalues.
bool pbh_full_rank(const Matrix& A, const Matrix& M, bool columns, double tol) {
  const int n = static_cast<int>(A.rows());
  Eigen::EigenSolver<Matrix> es(A, false);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
  for (int k = 0; k < n; ++k) {
    const std::complex<double> lambda = es.eigenvalues()(k);
    if (std::abs(lambda) < 1.0 - tol) continue;
    Eigen::MatrixXcd test;
    if (columns) {
      test.resize(n, n + M.cols());
      test << A.cast<std::complex<double>>() - lambda * I, M.cast<std::complex<double>>();
    } else {
      test.resize(n + M.rows(), n);
      test << A.cast<std::complex<double>>() - lambda * I, M.cast<std::complex<double>>();
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(test);
    const auto& s = svd.singularValues();
    const double thresh = tol * std::max(1.0, s(0));
    int rank = 0;
    for (int i = 0; i < s.size(); ++i) rank += s(i) > thresh;
    if (rank < n) return false;
  }
  return true;
}

}  // namespace

bool is_stabilizable(const Matrix& A, const Matrix& B, double tol) {
  return pbh_full_rank(A, B, true, tol);
}

bool is_detectable(const Matrix& A, const Matrix& C, double tol) {
  return pbh_full_rank(A, C, false, tol);
}

LtiModel validate_model(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D) {
  auto shape = [](const Matrix& M) {
    return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
  };
  const auto n = A.rows();
  if (n == 0 || A.cols() != n) throw DimensionError("A must be square and nonempty, got " + shape(A));
  if (B.rows() != n || B.cols() == 0) {
    throw DimensionError("B must have " + std::to_string(n) + " rows, got " + shape(B));
  }
  if (C.cols() != n || C.rows() == 0) {
    throw DimensionError("C must have " + std::to_string(n) + " columns, got " + shape(C));
  }
  if (D.rows() != C.rows() || D.cols() != B.cols()) {
    throw DimensionError("D must be " + std::to_string(C.rows()) + "x" + std::to_string(B.cols()) +
                         ", got " + shape(D));
  }
  if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !D.allFinite()) {
    throw InputError("model matrices contain non-finite entries");
  }
  LtiModel model;
  model.A_ = A;
  model.B_ = B;
  model.C_ = C;
  model.D_ = D;
  model.stabilizable_ = is_stabilizable(A, B);
  model.detectable_ = is_detectable(A, C);
  if (!model.stabilizable_) warn("(A, B) fails the PBH stabilizability test");
  if (!model.detectable_) warn("(A, C) fails the PBH detectability test");
  return model;
}

SteadyStateTarget steady_state_target(const LtiModel& model, const Vector& r, double tol) {
  const int n = model.n(), p = model.p(), m = model.m();
  if (r.size() != m) throw DimensionError("reference must have " + std::to_string(m) + " entries");
  Matrix M(n + m, n + p);
  M << model.A() - Matrix::Identity(n, n), model.B(), model.C(), model.D();
  Vector rhs(n + m);
  rhs << Vector::Zero(n), r;
  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(M);
  const Vector z = cod.solve(rhs);
  SteadyStateTarget target{z.head(n), z.tail(p), r};
  const double residual = steady_state_residual(model, target);
  if (!(residual <= tol * (1.0 + r.norm()))) {
    std::ostringstream os;
    os << "no steady state for this reference: residual " << residual << " (rank of [A-I B; C D] is "
       << cod.rank() << ")";
    throw NoSteadyStateError(os.str());
  }
  return target;
}

double steady_state_residual(const LtiModel& model, const SteadyStateTarget& t) {
  return (t.x_bar - model.A() * t.x_bar - model.B() * t.u_bar).norm() +
         (t.reference - model.C() * t.x_bar - model.D() * t.u_bar).norm();
}

HalfspaceSet shrink(const HalfspaceSet& set, double margin) {
  if (!(margin >= 0.0 && margin < 1.0)) throw InputError("shrink: margin must lie in [0, 1)");
  if (set.empty()) return set;
  if (set.offsets().maxCoeff() < 0.0) return set.with_offsets((1.0 - margin) * set.offsets());
  const ChebyshevBall ball = chebyshev_center(set, 1e6);
  if (ball.radius < 0.0) throw InfeasibleProblemError("shrink: polytope is empty");
  // a'(z - c) + (1 - margin)(a'c + b) <= 0
  const Vector ac = set.normals() * ball.center;
  return set.with_offsets((1.0 - margin) * set.offsets() - margin * ac);
}

bool is_strictly_admissible(const SteadyStateTarget& target, const HalfspaceSet& X,
                            const HalfspaceSet& U, double margin) {
  try {
    return shrink(X, margin).contains(target.x_bar) && shrink(U, margin).contains(target.u_bar);
  } catch (const InfeasibleProblemError&) {
    return false;
  }
}

StepResult step(const LtiModel& model, const Vector& x, const Vector& u) {
  if (x.size() != model.n() || u.size() != model.p()) throw DimensionError("step: wrong x or u size");
  return {model.A() * x + model.B() * u, model.C() * x + model.D() * u};
}

double spectral_radius(const Matrix& M) {
  if (M.rows() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace reap
