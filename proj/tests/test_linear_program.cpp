#include "doctest.h"
#include "test_support.hpp"

using namespace reap;

TEST_CASE("simplex solves a small bounded LP") {
  // max x + y  s.t.  x + 2y <= 4, 3x + y <= 6
  Matrix A(2, 2);
  A << 1, 2, 3, 1;
  Vector b(2), c(2);
  b << 4, 6;
  c << 1, 1;
  const LpResult r = maximize(c, A, b);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.value == doctest::Approx(2.8));
  CHECK(r.z(0) == doctest::Approx(1.6));
  CHECK(r.z(1) == doctest::Approx(1.2));
}

TEST_CASE("simplex handles free variables and negative offsets") {
  // max -x  s.t.  -x <= -3 (x >= 3), x <= 7
  Matrix A(2, 1);
  A << -1, 1;
  Vector b(2), c(1);
  b << -3, 7;
  c << -1;
  const LpResult r = maximize(c, A, b);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.z(0) == doctest::Approx(3.0));
}

TEST_CASE("simplex detects unbounded and infeasible problems") {
  Matrix A(1, 2);
  A << 1, -1;
  Vector b(1), c(2);
  b << 1;
  c << 1, 1;
  CHECK(maximize(c, A, b).status == LpStatus::Unbounded);

  Matrix B(2, 1);
  B << 1, -1;
  Vector h(2), d(1);
  h << -1, -1;  // x <= -1 and x >= 1
  d << 1;
  CHECK(maximize(d, B, h).status == LpStatus::Infeasible);
}

TEST_CASE("simplex agrees with vertex enumeration on random 2-D LPs") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 6;
    Matrix A(m, 2);
    Vector b(m), c(2);
    for (int i = 0; i < m; ++i) {
      const double th = 2.0 * M_PI * (i + 0.3 * g(rng)) / m;
      A(i, 0) = std::cos(th);
      A(i, 1) = std::sin(th);
      b(i) = 1.0 + 0.2 * std::abs(g(rng));
    }
    c << g(rng), g(rng);
    const LpResult r = maximize(c, A, b);
    if (r.status != LpStatus::Optimal) continue;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        Eigen::Matrix2d M;
        M << A.row(i), A.row(j);
        if (std::abs(M.determinant()) < 1e-12) continue;
        const Eigen::Vector2d v = M.partialPivLu().solve(Eigen::Vector2d(b(i), b(j)));
        if (((A * v - b).array() <= 1e-9).all()) best = std::max(best, c.dot(v));
      }
    }
    CHECK(r.value == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("chebyshev center of a box") {
  Vector lo(2), hi(2);
  lo << 0, 0;
  hi << 4, 2;
  const ChebyshevBall ball = chebyshev_center(HalfspaceSet::box(lo, hi), 10.0);
  CHECK(ball.radius == doctest::Approx(1.0));
  CHECK(ball.center(1) == doctest::Approx(1.0));
}

TEST_CASE("polytope sampling stays inside") {
  Vector lo(3), hi(3);
  lo << -1, -2, 0;
  hi << 1, 2, 0.5;
  const HalfspaceSet box = HalfspaceSet::box(lo, hi);
  std::mt19937_64 rng(5);
  const auto pts = sample_polytope(box, 200, rng);
  REQUIRE(pts.size() == 200);
  for (const auto& p : pts) CHECK(box.contains(p));
}
