// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#include "reap/oracle_qp.hpp"

#include <cmath>
#include <limits>

#include "reap/errors.hpp"
#include "reap/linear_program.hpp"

namespace reap {
namespace {

double max_step(const Vector& v, const Vector& dv) {
  double alpha = 1.0;
  for (int i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) alpha = std::min(alpha, -v(i) / dv(i));
  }
  return alpha;
}

}  // namespace

IpmResult solve_ipm(const Matrix& P, const Vector& q, const Matrix& G, const Vector& h,
                    const IpmOptions& options) {
  const int n = static_cast<int>(P.rows());
  const int m = static_cast<int>(G.rows());
  if (P.cols() != n || q.size() != n || G.cols() != n || h.size() != m) {
    throw DimensionError("solve_ipm: inconsistent dimensions");
  }
  IpmResult r;
  Eigen::LLT<Matrix> llt(P);
  if (llt.info() != Eigen::Success) throw NumericalError("solve_ipm: P is not positive definite");
  r.x = llt.solve(-q);
  if (m == 0) {
    r.z = r.s = Vector::Zero(0);
    return r;
  }
  r.s = (h - G * r.x).cwiseMax(1.0);
  r.z = Vector::Ones(m);
  const double scale_d = 1.0 + q.cwiseAbs().maxCoeff();
  const double scale_p = 1.0 + h.cwiseAbs().maxCoeff();
  for (r.iterations = 0; r.iterations < options.max_iterations; ++r.iterations) {
    const Vector rd = P * r.x + q + G.transpose() * r.z;
    const Vector rp = G * r.x + r.s - h;
    const double mu = r.s.dot(r.z) / m;
    if (rd.lpNorm<Eigen::Infinity>() <= options.tolerance * scale_d &&
        rp.lpNorm<Eigen::Infinity>() <= options.tolerance * scale_p && mu <= options.tolerance * 0.1) {
      return r;
    }
    const Vector w = r.z.cwiseQuotient(r.s);
    const Matrix M = P + G.transpose() * w.asDiagonal() * G;
    Eigen::LLT<Matrix> kkt(M);
    if (kkt.info() != Eigen::Success) throw NumericalError("solve_ipm: reduced KKT system is singular");

    auto direction = [&](const Vector& rc, Vector& dx, Vector& ds, Vector& dz) {
      // Z ds + S dz = rc,  G dx + ds = -rp,  P dx + G'dz = -rd
      dx = kkt.solve(-rd - G.transpose() * (rc + r.z.cwiseProduct(rp)).cwiseQuotient(r.s));
      ds = -rp - G * dx;
      dz = (rc - r.z.cwiseProduct(ds)).cwiseQuotient(r.s);
    };
    Vector dx, ds, dz;
    direction(-r.s.cwiseProduct(r.z), dx, ds, dz);
    const double a_aff = std::min(max_step(r.s, ds), max_step(r.z, dz));
    const double mu_aff = (r.s + a_aff * ds).dot(r.z + a_aff * dz) / m;
    const double centering = std::pow(mu_aff / mu, 3);
    const Vector rc = -r.s.cwiseProduct(r.z) - ds.cwiseProduct(dz) + Vector::Constant(m, centering * mu);
    direction(rc, dx, ds, dz);
    const double alpha = std::min(1.0, 0.99 * std::min(max_step(r.s, ds), max_step(r.z, dz)));
    r.x += alpha * dx;
    r.s += alpha * ds;
    r.z += alpha * dz;
  }
  throw NumericalError("solve_ipm: no convergence within " + std::to_string(options.max_iterations) +
                       " iterations");
}

double interior_depth(const HalfspaceSet& set, double cap) {
  if (set.empty()) return cap;
  const int d = set.dim();
  Matrix A(set.size() + 1, d + 1);
  Vector b(set.size() + 1);
  A.topLeftCorner(set.size(), d) = set.normals();
  A.col(d).head(set.size()).setOnes();
  b.head(set.size()) = -set.offsets();
  A.row(set.size()).setZero();
  A(set.size(), d) = 1.0;
  b(set.size()) = cap;
  Vector c = Vector::Zero(d + 1);
  c(d) = 1.0;
  const LpResult lp = maximize(c, A, b);
  if (lp.status != LpStatus::Optimal) throw NumericalError("interior_depth: LP did not solve");
  return lp.z(d);
}

OracleSolution solve_exact(const CondensedQp& qp, const IpmOptions& options) {
  const HalfspaceSet level = qp.constraints.with_offsets(qp.constraints.offsets().array() + 1.0 / qp.beta);
  if (!(interior_depth(level) > 1e-12)) {
    throw InfeasibleProblemError("solve_exact: the constraint set has no interior (phase-1 depth <= 0)");
  }
  const IpmResult ipm = solve_ipm(2.0 * qp.H, 2.0 * qp.f, level.normals(), -level.offsets(), options);
  OracleSolution sol;
  sol.u_dagger = ipm.x;
  sol.multipliers = ipm.z;
  sol.iterations = ipm.iterations;
  const Vector args = -qp.beta * qp.constraints.evaluate(ipm.x);
  sol.lambda_dagger = ipm.z.cwiseProduct(args) / qp.beta;
  sol.kkt_residual = kkt_residual(qp, ipm.x, ipm.z);
  return sol;
}

double kkt_residual(const CondensedQp& qp, const Vector& u, const Vector& z) {
  if (u.size() != qp.dim() || z.size() != qp.rows()) throw DimensionError("kkt_residual: size mismatch");
  const Vector c = qp.constraints.evaluate(u).array() + 1.0 / qp.beta;
  const double stationarity =
      (2.0 * (qp.H * u + qp.f) + qp.constraints.normals().transpose() * z).lpNorm<Eigen::Infinity>();
  if (qp.rows() == 0) return stationarity;
  const double feasibility = std::max(c.maxCoeff(), 0.0);
  const double complementarity = z.cwiseProduct(c).lpNorm<Eigen::Infinity>();
  const double sign = std::max(-z.minCoeff(), 0.0);
  return stationarity + feasibility + complementarity + sign;
}

Vector project_feasible(const HalfspaceSet& set, const Vector& target, double margin) {
  if (target.size() != set.dim()) throw DimensionError("project_feasible: size mismatch");
  const HalfspaceSet shrunk = set.with_offsets(set.offsets().array() + margin);
  if (!(interior_depth(shrunk) > 1e-12)) {
    throw InfeasibleProblemError("project_feasible: shrunk constraint set is empty");
  }
  const int d = set.dim();
  const IpmResult ipm =
      solve_ipm(2.0 * Matrix::Identity(d, d), -2.0 * target, shrunk.normals(), -shrunk.offsets());
  return ipm.x;
}

}  // namespace reap
