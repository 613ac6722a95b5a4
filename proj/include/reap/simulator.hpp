// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reap/condensed_qp.hpp"
#include "reap/reap_solver.hpp"

namespace reap {

struct Scenario {
  std::string name;
  LtiModel model;
  HalfspaceSet X;
  HalfspaceSet U;
  Matrix Qx;
  Matrix Qu;
  int horizon = 10;
  Vector reference;
  /// Nominal initial state.
  Vector x0;
  /// Randomized initial states: center + U[-spread, spread] componentwise.
  Vector mc_center;
  Vector mc_spread;
  ReapConfig reap;
  int steps = 150;
  std::uint64_t rng_seed = 1;
  double admissibility_margin = 0.02;
  TerminalOverrides terminal;
  /// Absolute tolerance above which a constraint counts as violated.
  double violation_tol = 1e-9;

  /// Throws InputError / DimensionError on inconsistent data.
  void validate() const;
};

/// Scenario with its offline design (target, terminal ingredients, condensed
/// operators). Immutable and shareable across threads.
struct PreparedScenario {
  Scenario scenario;
  SteadyStateTarget target;
  std::shared_ptr<const CondensedMpc> mpc;
};

/// Throws ScenarioSetupError when the reference is not strictly admissible.
PreparedScenario prepare(const Scenario& scenario);

/// Initial iterate for one sampling instant: the shift-and-pad warm start (the
/// terminal-law rollout at t = 0). When it violates the invariants, the
/// rollout is tried, then its projection onto the constraint set shrunk by
/// min(1e-3, depth / 2); `repairs` counts these substitutions. Throws
/// ScenarioSetupError at t = 0 when nothing feasible is found.
PrimalDual initial_iterate(const CondensedMpc& mpc, const CondensedQp& qp, const ReapConfig& cfg,
                           const std::optional<PrimalDual>& prev, const Vector& x, int& repairs);

struct Trajectory {
  std::vector<Vector> states;  // steps + 1 entries when the run completes
  std::vector<Vector> inputs;
  std::vector<long> iterations;
  /// violated[t]: u(t) outside U or x(t+1) outside X.
  std::vector<bool> violated;
  std::vector<double> subopt_gap;  // filled when the oracle is enabled
  int warm_start_repairs = 0;
  int stalls = 0;
  bool terminated_early = false;

  bool any_violation() const;
  int steps() const { return static_cast<int>(inputs.size()); }
};

struct ClosedLoopOptions {
  bool oracle = false;
  /// Apply the oracle solution instead of REAP (unlimited-compute baseline).
  bool apply_oracle = false;
  std::optional<Vector> x0;
  /// Per-step iteration budget; overrides the scenario budget when set.
  std::function<long(int t)> budget_schedule;
};

Trajectory run_closed_loop(const PreparedScenario& prepared, const ClosedLoopOptions& options = {});
Trajectory run_closed_loop(const Scenario& scenario, bool oracle_enabled);

double performance_metric(const Trajectory& traj, const SteadyStateTarget& target, const Matrix& Qx,
                          const Matrix& Qu);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

struct McCase {
  std::string name;
  SigmaPolicy policy;
};

/// Cases I-IV (fixed 2.22e-16, 0.5, 0.05, 0.005) and V (adaptive).
std::vector<McCase> standard_cases(const AdaptiveSigma& adaptive = {});
/// Select cases by name ("I,II,V"). Throws InputError on an unknown name.
std::vector<McCase> select_cases(const std::string& names, const AdaptiveSigma& adaptive = {});

struct RunSummary {
  Vector x0;
  bool violated = false;
  int first_violation = -1;
  long iterations = 0;
  double performance = 0.0;
  bool terminated_early = false;
  int warm_start_repairs = 0;
};

struct CaseResult {
  McCase spec;
  int violating_runs = 0;
  double violation_percentage = 0.0;
  std::vector<RunSummary> runs;
};

struct MonteCarloReport {
  int runs = 0;
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<CaseResult> cases;
};

/// Draw n initial states with a seeded mt19937_64.
std::vector<Vector> draw_initial_states(const Scenario& scenario, int n, std::uint64_t seed);

/// Worker count: REAP_THREADS if set, else hardware concurrency.
int default_thread_count();

MonteCarloReport monte_carlo(const Scenario& base, const std::vector<McCase>& cases, int n_runs,
                             std::uint64_t seed, int threads = 0);

struct SweepPoint {
  long budget = 0;
  double performance = 0.0;
  double degradation = 0.0;  // percent
  bool violated = false;
};

struct SweepResult {
  double baseline = 0.0;
  std::vector<SweepPoint> points;
};

SweepResult suboptimality_sweep(const Scenario& scenario, const std::vector<long>& budgets);

/// Run fn(0..count-1) on a worker pool; the first exception is rethrown.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace reap
