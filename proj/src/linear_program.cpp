// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#include "reap/linear_program.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "reap/errors.hpp"

namespace reap {
namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kCostTol = 1e-10;

// Tableau in canonical form: rows are constraints, the last column is the
// right-hand side. obj holds the reduced-cost row (c_B' T - c) and the
// current objective value in its last entry.
struct Tableau {
  Matrix T;
  Eigen::RowVectorXd obj;
  std::vector<int> basis;
  std::vector<bool> allowed;

  int rows() const { return static_cast<int>(T.rows()); }
  int cols() const { return static_cast<int>(T.cols()) - 1; }

  void pivot(int r, int c) {
    T.row(r) /= T(r, c);
    for (int i = 0; i < rows(); ++i) {
      if (i != r && T(i, c) != 0.0) T.row(i) -= T(i, c) * T.row(r);
    }
    if (obj(c) != 0.0) obj -= obj(c) * T.row(r);
    basis[r] = c;
  }

  void set_objective(const Vector& c) {
    obj = Eigen::RowVectorXd::Zero(cols() + 1);
    obj.head(cols()) = -c.transpose();
    for (int i = 0; i < rows(); ++i) {
      const double cb = c(basis[i]);
      if (cb != 0.0) obj += cb * T.row(i);
    }
  }

  // Returns false when unbounded.
  bool optimize(int& iterations, int max_iterations) {
    while (true) {
      int enter = -1;
      for (int j = 0; j < cols(); ++j) {
        if (allowed[j] && obj(j) < -kCostTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows(); ++i) {
        const double a = T(i, enter);
        if (a > kPivotTol) {
          const double ratio = T(i, cols()) / a;
          if (ratio < best - 1e-14 ||
              (leave >= 0 && std::abs(ratio - best) <= 1e-14 && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      if (++iterations > max_iterations) throw NumericalError("simplex: iteration limit reached");
    }
  }
};

}  // namespace

LpResult maximize(const Vector& c, const Matrix& A, const Vector& b, int max_iterations) {
  const int n = static_cast<int>(A.cols());
  const int m = static_cast<int>(A.rows());
  if (c.size() != n || b.size() != m) throw DimensionError("maximize: inconsistent LP dimensions");

  LpResult result;
  if (m == 0) {
    if (c.cwiseAbs().maxCoeff() > 0.0) {
      result.status = LpStatus::Unbounded;
    } else {
      result.status = LpStatus::Optimal;
      result.z = Vector::Zero(n);
    }
    return result;
  }

  // Columns: z+ (n), z- (n), slack (m), artificial (one per negative rhs).
  std::vector<int> artificial_row;
  for (int i = 0; i < m; ++i) {
    if (b(i) < 0.0) artificial_row.push_back(i);
  }
  const int n_art = static_cast<int>(artificial_row.size());
  const int n_cols = 2 * n + m + n_art;

  Tableau tab;
  tab.T = Matrix::Zero(m, n_cols + 1);
  tab.basis.assign(m, -1);
  tab.allowed.assign(n_cols, true);
  int k = 0;
  for (int i = 0; i < m; ++i) {
    const double sign = b(i) < 0.0 ? -1.0 : 1.0;
    tab.T.block(i, 0, 1, n) = sign * A.row(i);
    tab.T.block(i, n, 1, n) = -sign * A.row(i);
    tab.T(i, 2 * n + i) = sign;
    tab.T(i, n_cols) = sign * b(i);
    if (sign < 0.0) {
      const int col = 2 * n + m + k++;
      tab.T(i, col) = 1.0;
      tab.basis[i] = col;
    } else {
      tab.basis[i] = 2 * n + i;
    }
  }

  if (n_art > 0) {
    Vector phase1 = Vector::Zero(n_cols);
    phase1.tail(n_art).setConstant(-1.0);
    tab.set_objective(phase1);
    tab.optimize(result.iterations, max_iterations);
    const double scale = 1.0 + b.cwiseAbs().maxCoeff();
    if (tab.obj(n_cols) < -1e-9 * scale) {
      result.status = LpStatus::Infeasible;
      return result;
    }
    // Drive remaining artificials out of the basis.
    for (int i = 0; i < tab.rows(); ++i) {
      if (tab.basis[i] < 2 * n + m) continue;
      int col = -1;
      for (int j = 0; j < 2 * n + m; ++j) {
        if (std::abs(tab.T(i, j)) > 1e-9) {
          col = j;
          break;
        }
      }
      if (col >= 0) tab.pivot(i, col);
    }
    for (int j = 2 * n + m; j < n_cols; ++j) tab.allowed[j] = false;
  }

  Vector cost = Vector::Zero(n_cols);
  cost.head(n) = c;
  cost.segment(n, n) = -c;
  tab.set_objective(cost);
  if (!tab.optimize(result.iterations, max_iterations)) {
    result.status = LpStatus::Unbounded;
    return result;
  }

  Vector x = Vector::Zero(n_cols);
  for (int i = 0; i < tab.rows(); ++i) x(tab.basis[i]) = tab.T(i, n_cols);
  result.z = x.head(n) - x.segment(n, n);
  result.value = c.dot(result.z);
  result.status = LpStatus::Optimal;
  return result;
}

ChebyshevBall chebyshev_center(const HalfspaceSet& set, double radius_cap) {
  const int d = set.dim();
  ChebyshevBall ball;
  if (set.empty()) {
    ball.center = Vector::Zero(d);
    ball.radius = radius_cap;
    return ball;
  }
  // max t  s.t.  a_i'z + |a_i| t <= -b_i,  t <= cap
  Matrix A(set.size() + 1, d + 1);
  Vector b(set.size() + 1);
  A.topLeftCorner(set.size(), d) = set.normals();
  A.col(d).head(set.size()) = set.normals().rowwise().norm();
  b.head(set.size()) = -set.offsets();
  A.row(set.size()).setZero();
  A(set.size(), d) = 1.0;
  b(set.size()) = radius_cap;
  Vector c = Vector::Zero(d + 1);
  c(d) = 1.0;
  const LpResult lp = maximize(c, A, b);
  if (lp.status != LpStatus::Optimal) throw NumericalError("chebyshev_center: LP did not solve");
  ball.center = lp.z.head(d);
  ball.radius = lp.z(d);
  return ball;
}

}  // namespace reap

namespace reap {

std::vector<Vector> sample_polytope(const HalfspaceSet& set, int count, std::mt19937_64& rng,
                                    int thinning, double chord_cap) {
  const ChebyshevBall ball = chebyshev_center(set, 1.0);
  if (!(ball.radius > 0.0)) throw InfeasibleProblemError("sample_polytope: polytope has no interior");
  const int d = set.dim();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> samples;
  samples.reserve(count);
  Vector z = ball.center;
  for (int s = 0; s < count * thinning; ++s) {
    Vector dir(d);
    for (int i = 0; i < d; ++i) dir(i) = normal(rng);
    dir.normalize();
    // a'(z + t dir) + b <= 0  for all rows
    const Vector slope = set.normals() * dir;
    const Vector slack = -set.evaluate(z);
    double lo = -chord_cap, hi = chord_cap;
    for (int i = 0; i < set.size(); ++i) {
      if (slope(i) > 1e-14) hi = std::min(hi, slack(i) / slope(i));
      if (slope(i) < -1e-14) lo = std::max(lo, slack(i) / slope(i));
    }
    if (hi > lo) z += (lo + (hi - lo) * unit(rng)) * dir;
    if ((s + 1) % thinning == 0) samples.push_back(z);
  }
  return samples;
}

}  // namespace reap
