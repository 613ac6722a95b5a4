// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#include "reap/simulator.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "reap/errors.hpp"
#include "reap/oracle_qp.hpp"

namespace reap {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InputError("scenario: " + what);
}

}  // namespace

void Scenario::validate() const {
  const int n = model.n(), p = model.p(), m = model.m();
  require(n > 0, "model is not set");
  require(X.dim() == n, "state constraints must have dimension n");
  require(U.dim() == p, "input constraints must have dimension p");
  require(Qx.rows() == n && Qx.cols() == n, "Qx must be n x n");
  require(Qu.rows() == p && Qu.cols() == p, "Qu must be p x p");
  require(horizon >= 1, "horizon must be at least 1");
  require(reference.size() == m, "reference must have m entries");
  require(x0.size() == n, "x0 must have n entries");
  require(mc_center.size() == n, "monte carlo center must have n entries");
  require(mc_spread.size() == n, "monte carlo spread must have n entries");
  require((mc_spread.array() >= 0.0).all(), "monte carlo spread must be nonnegative");
  require(steps >= 1, "steps must be at least 1");
  require(admissibility_margin > 0.0 && admissibility_margin < 1.0, "admissibility margin must lie in (0, 1)");
  require(violation_tol >= 0.0, "violation tolerance must be nonnegative");
  reap.validate();
}

PreparedScenario prepare(const Scenario& scenario) {
  scenario.validate();
  PreparedScenario out{scenario, steady_state_target(scenario.model, scenario.reference), nullptr};
  if (!is_strictly_admissible(out.target, scenario.X, scenario.U, scenario.admissibility_margin)) {
    throw ScenarioSetupError("admissibility: reference is not strictly steady-state admissible");
  }
  TerminalDesign design = design_terminal(scenario.model, scenario.Qx, scenario.Qu, out.target,
                                          scenario.X, scenario.U, scenario.terminal);
  out.mpc = std::make_shared<const CondensedMpc>(scenario.model, scenario.X, scenario.U, scenario.Qx,
                                                 scenario.Qu, scenario.horizon, std::move(design),
                                                 out.target, scenario.reap.beta);
  return out;
}

PrimalDual initial_iterate(const CondensedMpc& mpc, const CondensedQp& qp, const ReapConfig& cfg,
                           const std::optional<PrimalDual>& prev, const Vector& x, int& repairs) {
  const int N = mpc.horizon();
  const Matrix& K = mpc.terminal().K;
  const double floor = cfg.epsilon + cfg.dual_floor_margin;
  PrimalDual cand = prev ? shift_warm_start(*prev, mpc.model(), K, mpc.target(), x, N, floor)
                         : rollout_warm_start(mpc.model(), K, mpc.target(), x, N, qp.rows());
  if (satisfies_invariants(qp, cand, cfg.epsilon)) return cand;

  const Vector rollout = terminal_rollout(mpc.model(), K, mpc.target(), x, N);
  if (prev) {
    PrimalDual alt{rollout, cand.lambda};
    if (satisfies_invariants(qp, alt, cfg.epsilon)) {
      ++repairs;
      return alt;
    }
  }
  const double depth = interior_depth(qp.constraints);
  const double margin = std::min(1e-3, 0.5 * depth);
  if (margin > 2.0 * cfg.epsilon) {
    PrimalDual proj{project_feasible(qp.constraints, rollout, margin), cand.lambda};
    if (satisfies_invariants(qp, proj, cfg.epsilon)) {
      ++repairs;
      return proj;
    }
  }
  if (!prev) {
    throw ScenarioSetupError(
        "no feasible initial input sequence at t = 0 (constraint depth " + std::to_string(depth) +
        "); move x0 closer to the reference or supply a feasible sequence from a feasibility governor");
  }
  return cand;
}

bool Trajectory::any_violation() const {
  for (bool v : violated) {
    if (v) return true;
  }
  return false;
}

Trajectory run_closed_loop(const PreparedScenario& prepared, const ClosedLoopOptions& options) {
  const Scenario& sc = prepared.scenario;
  const CondensedMpc& mpc = *prepared.mpc;
  const int p = sc.model.p();
  Trajectory traj;
  Vector x = options.x0 ? *options.x0 : sc.x0;
  if (x.size() != sc.model.n()) throw DimensionError("x0 has the wrong size");
  if (!sc.X.contains(x, sc.violation_tol)) throw ScenarioSetupError("x0 violates the state constraints");
  traj.states.push_back(x);
  std::optional<PrimalDual> prev;
  ReapConfig cfg = sc.reap;

  for (int t = 0; t < sc.steps; ++t) {
    CondensedQp qp;
    try {
      qp = mpc.at(x, true);
    } catch (const InfeasibleStateError&) {
      traj.terminated_early = true;
      break;
    }
    Vector u;
    long iterations = 0;
    std::optional<OracleSolution> oracle;
    if (options.oracle || options.apply_oracle) oracle = solve_exact(qp);
    if (options.apply_oracle) {
      u = oracle->u_dagger;
      prev = PrimalDual{u, oracle->lambda_dagger.cwiseMax(cfg.epsilon)};
    } else {
      const PrimalDual warm = initial_iterate(mpc, qp, cfg, prev, x, traj.warm_start_repairs);
      if (options.budget_schedule) cfg.budget = Budget::iterations(options.budget_schedule(t));
      ReapResult res;
      if (cfg.adaptive() && !satisfies_invariants(qp, warm, cfg.epsilon, 1e-9)) {
        // Recursive feasibility lost; keep the candidate without iterating.
        res.state = warm;
      } else {
        res = run(qp, warm, cfg);
      }
      iterations = res.trace.iterations;
      traj.stalls += res.trace.stalled;
      u = res.state.u;
      prev = res.state;
    }
    if (options.oracle) traj.subopt_gap.push_back(qp.cost(u) - qp.cost(oracle->u_dagger));

    const Vector applied = u.head(p);
    x = sc.model.A() * x + sc.model.B() * applied;
    const bool finite = applied.allFinite() && x.allFinite();
    const bool bad = !finite || sc.U.max_violation(applied) > sc.violation_tol ||
                     sc.X.max_violation(x) > sc.violation_tol;
    traj.inputs.push_back(applied);
    traj.iterations.push_back(iterations);
    traj.violated.push_back(bad);
    traj.states.push_back(x);
    if (!finite) {
      traj.terminated_early = true;
      break;
    }
  }
  return traj;
}

Trajectory run_closed_loop(const Scenario& scenario, bool oracle_enabled) {
  ClosedLoopOptions options;
  options.oracle = oracle_enabled;
  return run_closed_loop(prepare(scenario), options);
}

double performance_metric(const Trajectory& traj, const SteadyStateTarget& target, const Matrix& Qx,
                          const Matrix& Qu) {
  double total = 0.0;
  for (size_t t = 0; t < traj.inputs.size(); ++t) {
    const Vector dx = traj.states[t] - target.x_bar;
    const Vector du = traj.inputs[t] - target.u_bar;
    total += dx.dot(Qx * dx) + du.dot(Qu * du);
  }
  return total;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states[0].size());
  const int p = traj.inputs.empty() ? 0 : static_cast<int>(traj.inputs[0].size());
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",x_" << i;
  for (int i = 1; i <= p; ++i) os << ",u_" << i;
  os << ",iterations,violated,subopt_gap\n";
  os << std::setprecision(17);
  for (size_t t = 0; t < traj.states.size(); ++t) {
    os << t;
    for (int i = 0; i < n; ++i) os << ',' << traj.states[t](i);
    const bool has_input = t < traj.inputs.size();
    for (int i = 0; i < p; ++i) {
      os << ',';
      if (has_input) os << traj.inputs[t](i);
    }
    os << ',';
    if (has_input) os << traj.iterations[t];
    os << ',';
    if (has_input) os << (traj.violated[t] ? 1 : 0);
    os << ',';
    if (t < traj.subopt_gap.size()) os << traj.subopt_gap[t];
    os << '\n';
  }
}

std::vector<McCase> standard_cases(const AdaptiveSigma& adaptive) {
  return {{"I", FixedSigma{2.22e-16}},
          {"II", FixedSigma{0.5}},
          {"III", FixedSigma{0.05}},
          {"IV", FixedSigma{0.005}},
          {"V", adaptive}};
}

std::vector<McCase> select_cases(const std::string& names, const AdaptiveSigma& adaptive) {
  const auto all = standard_cases(adaptive);
  std::vector<McCase> out;
  std::stringstream ss(names);
  std::string item;
  while (std::getline(ss, item, ',')) {
    bool found = false;
    for (const auto& c : all) {
      if (c.name == item) {
        out.push_back(c);
        found = true;
      }
    }
    if (!found) throw InputError("unknown case '" + item + "' (expected I, II, III, IV or V)");
  }
  if (out.empty()) throw InputError("no cases selected");
  return out;
}

std::vector<Vector> draw_initial_states(const Scenario& scenario, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Vector> out;
  out.reserve(n);
  for (int r = 0; r < n; ++r) {
    Vector x = scenario.mc_center;
    for (int i = 0; i < x.size(); ++i) {
      if (scenario.mc_spread(i) > 0.0) x(i) += scenario.mc_spread(i) * unit(rng);
    }
    out.push_back(x);
  }
  return out;
}

int default_thread_count() {
  if (const char* env = std::getenv("REAP_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, count));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

MonteCarloReport monte_carlo(const Scenario& base, const std::vector<McCase>& cases, int n_runs,
                             std::uint64_t seed, int threads) {
  if (n_runs < 1) throw InputError("monte_carlo: runs must be at least 1");
  if (threads <= 0) threads = default_thread_count();
  const std::vector<Vector> x0s = draw_initial_states(base, n_runs, seed);

  std::vector<PreparedScenario> prepared;
  MonteCarloReport report;
  report.runs = n_runs;
  report.seed = seed;
  report.threads = threads;
  const PreparedScenario shared = prepare(base);
  for (const auto& c : cases) {
    PreparedScenario ps = shared;
    ps.scenario.reap.sigma_policy = c.policy;
    prepared.push_back(std::move(ps));
    CaseResult cr;
    cr.spec = c;
    cr.runs.resize(n_runs);
    report.cases.push_back(std::move(cr));
  }
  const int jobs = static_cast<int>(cases.size()) * n_runs;
  parallel_for(jobs, threads, [&](int job) {
    const int ci = job / n_runs, r = job % n_runs;
    ClosedLoopOptions opt;
    opt.x0 = x0s[r];
    const Trajectory traj = run_closed_loop(prepared[ci], opt);
    RunSummary& s = report.cases[ci].runs[r];
    s.x0 = x0s[r];
    s.violated = traj.any_violation() || traj.terminated_early;
    for (size_t t = 0; t < traj.violated.size(); ++t) {
      if (traj.violated[t]) {
        s.first_violation = static_cast<int>(t);
        break;
      }
    }
    for (long it : traj.iterations) s.iterations += it;
    s.performance = performance_metric(traj, prepared[ci].target, base.Qx, base.Qu);
    s.terminated_early = traj.terminated_early;
    s.warm_start_repairs = traj.warm_start_repairs;
  });
  for (auto& cr : report.cases) {
    for (const auto& s : cr.runs) cr.violating_runs += s.violated;
    cr.violation_percentage = 100.0 * cr.violating_runs / n_runs;
  }
  return report;
}

SweepResult suboptimality_sweep(const Scenario& scenario, const std::vector<long>& budgets) {
  const PreparedScenario prepared = prepare(scenario);
  SweepResult result;
  ClosedLoopOptions base;
  base.apply_oracle = true;
  const Trajectory opt = run_closed_loop(prepared, base);
  result.baseline = performance_metric(opt, prepared.target, scenario.Qx, scenario.Qu);
  result.points.resize(budgets.size());
  parallel_for(static_cast<int>(budgets.size()), default_thread_count(), [&](int i) {
    PreparedScenario ps = prepared;
    ps.scenario.reap.budget = Budget::iterations(budgets[i]);
    const Trajectory traj = run_closed_loop(ps, {});
    SweepPoint& pt = result.points[i];
    pt.budget = budgets[i];
    pt.performance = performance_metric(traj, prepared.target, scenario.Qx, scenario.Qu);
    pt.degradation = 100.0 * (pt.performance - result.baseline) / result.baseline;
    pt.violated = traj.any_violation();
  });
  return result;
}

}  // namespace reap
