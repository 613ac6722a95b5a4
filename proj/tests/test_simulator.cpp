#include "doctest.h"
#include "test_support.hpp"

using namespace reap;
using reap::testing::load;
using reap::testing::prepared;

TEST_CASE("equilibrium start stays at the equilibrium") {
  const auto& ps = prepared("bebop");
  ClosedLoopOptions opt;
  opt.x0 = ps.target.x_bar;
  PreparedScenario short_run = ps;
  short_run.scenario.steps = 20;
  const Trajectory traj = run_closed_loop(short_run, opt);
  REQUIRE(traj.steps() == 20);
  for (const auto& x : traj.states) CHECK((x - ps.target.x_bar).norm() < 1e-9);
  for (const auto& u : traj.inputs) CHECK((u - ps.target.u_bar).norm() < 1e-9);
  CHECK_FALSE(traj.any_violation());
  CHECK(performance_metric(traj, ps.target, ps.scenario.Qx, ps.scenario.Qu) < 1e-12);
}

TEST_CASE("performance metric of a unit deviation") {
  Trajectory traj;
  const SteadyStateTarget t{Vector::Zero(2), Vector::Zero(1), Vector::Zero(1)};
  traj.states = {Vector::Unit(2, 0), Vector::Zero(2)};
  traj.inputs = {Vector::Zero(1)};
  traj.iterations = {0};
  traj.violated = {false};
  CHECK(performance_metric(traj, t, Matrix::Identity(2, 2), Matrix::Identity(1, 1)) == doctest::Approx(1.0));
}

TEST_CASE("double integrator closed loop converges without violations") {
  const Trajectory traj = run_closed_loop(load("double_integrator"), false);
  REQUIRE(traj.steps() == 60);
  CHECK_FALSE(traj.any_violation());
  CHECK_FALSE(traj.terminated_early);
  CHECK(std::abs(traj.states.back()(0) - 4.85) <= 1e-2);
}

TEST_CASE("drone nominal run converges without violations") {
  const auto& ps = prepared("bebop");
  const Trajectory traj = run_closed_loop(ps, {});
  REQUIRE(traj.steps() == 150);
  CHECK_FALSE(traj.any_violation());
  const Vector& x = traj.states.back();
  Vector pos(3), ref(3);
  pos << x(0), x(2), x(4);
  ref << 0, 0, 1.5;
  CHECK((pos - ref).norm() <= 2e-2);

  // Recompute the performance from the CSV text.
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,x_1,x_2,x_3,x_4,x_5,x_6,u_1,u_2,u_3,iterations,violated,subopt_gap");
  double perf = 0.0;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    if (cells.size() < 10 || cells[7].empty()) continue;
    Vector xs(6), us(3);
    for (int i = 0; i < 6; ++i) xs(i) = std::stod(cells[1 + i]);
    for (int i = 0; i < 3; ++i) us(i) = std::stod(cells[7 + i]);
    const Vector dx = xs - ps.target.x_bar, du = us - ps.target.u_bar;
    perf += dx.dot(ps.scenario.Qx * dx) + du.dot(ps.scenario.Qu * du);
  }
  const double direct = performance_metric(traj, ps.target, ps.scenario.Qx, ps.scenario.Qu);
  CHECK(direct > 0.0);
  CHECK(std::abs(perf - direct) <= 1e-9 * direct);
}

TEST_CASE("random per-step budgets never violate constraints") {
  const auto& ps = prepared("bebop");
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<long> budget(1, 200);
  std::vector<long> schedule(ps.scenario.steps);
  for (auto& b : schedule) b = budget(rng);
  ClosedLoopOptions opt;
  opt.budget_schedule = [&](int t) { return schedule[t]; };
  const Trajectory traj = run_closed_loop(ps, opt);
  CHECK_FALSE(traj.any_violation());
  CHECK_FALSE(traj.terminated_early);
}

TEST_CASE("state-constraint scenario respects its state bounds") {
  const auto& ps = prepared("bebop_state_constraints");
  const Trajectory traj = run_closed_loop(ps, {});
  CHECK_FALSE(traj.any_violation());
  for (const auto& x : traj.states) {
    CHECK(x(2) >= -0.01 - 1e-9);
    CHECK(x(4) <= 1.95 + 1e-9);
  }
}

TEST_CASE("fixed sigma 0.5 violates on the drone") {
  PreparedScenario ps = prepared("bebop");
  ps.scenario.reap.sigma_policy = FixedSigma{0.5};
  ps.scenario.steps = 30;
  CHECK(run_closed_loop(ps, {}).any_violation());
}

TEST_CASE("oracle gap is recorded and nonnegative at convergence") {
  Scenario sc = load("double_integrator");
  sc.steps = 10;
  const Trajectory traj = run_closed_loop(sc, true);
  REQUIRE(traj.subopt_gap.size() == 10);
  for (double g : traj.subopt_gap) CHECK(g >= -1e-8);
}

TEST_CASE("monte carlo with one run equals the closed loop on the same draw") {
  Scenario sc = load("bebop");
  sc.steps = 30;
  const MonteCarloReport rep = monte_carlo(sc, select_cases("V"), 1, 42, 1);
  const auto x0 = draw_initial_states(sc, 1, 42);
  ClosedLoopOptions opt;
  opt.x0 = x0[0];
  const Trajectory traj = run_closed_loop(prepare(sc), opt);
  REQUIRE(rep.cases.size() == 1);
  const RunSummary& s = rep.cases[0].runs[0];
  CHECK((s.x0 - x0[0]).norm() == 0.0);
  CHECK(s.violated == traj.any_violation());
  CHECK(s.performance == performance_metric(traj, prepare(sc).target, sc.Qx, sc.Qu));
  CHECK_THROWS_AS(monte_carlo(sc, select_cases("V"), 0, 1), InputError);
}

TEST_CASE("monte carlo is deterministic and independent of thread count") {
  Scenario sc = load("bebop");
  sc.steps = 20;
  const auto cases = select_cases("III,V");
  const MonteCarloReport a = monte_carlo(sc, cases, 6, 9, 1);
  const MonteCarloReport b = monte_carlo(sc, cases, 6, 9, 4);
  for (size_t c = 0; c < cases.size(); ++c) {
    CHECK(a.cases[c].violating_runs == b.cases[c].violating_runs);
    for (int r = 0; r < 6; ++r) {
      CHECK(a.cases[c].runs[r].performance == b.cases[c].runs[r].performance);
      CHECK(a.cases[c].runs[r].iterations == b.cases[c].runs[r].iterations);
    }
  }
  CHECK_THROWS_AS(select_cases("VI"), InputError);
}

TEST_CASE("large budget closes the gap to the oracle baseline") {
  Scenario sc = load("double_integrator");
  sc.reap.early_exit = true;
  const SweepResult r = suboptimality_sweep(sc, {1000000});
  REQUIRE(r.points.size() == 1);
  CHECK(r.baseline > 0.0);
  CHECK(std::abs(r.points[0].degradation) <= 0.01);
  CHECK_FALSE(r.points[0].violated);
}

TEST_CASE("start outside the state set raises a setup error") {
  Scenario sc = load("double_integrator");
  sc.x0 << 6.0, 0.0;
  CHECK_THROWS_AS(run_closed_loop(sc, false), ScenarioSetupError);
}

TEST_CASE("inadmissible reference is rejected at preparation") {
  Scenario sc = load("double_integrator");
  sc.reference(0) = 4.95;
  CHECK_THROWS_AS(prepare(sc), ScenarioSetupError);
}
