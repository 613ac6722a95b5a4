// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "reap/errors.hpp"
#include "reap/oracle_qp.hpp"
#include "reap/report.hpp"
#include "reap/scenario_io.hpp"

namespace reap::cli {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Scenario load(const CliConfig& cfg) {
  Scenario sc = parse_scenario(cfg.scenario_path, cfg.overrides);
  if (cfg.seed) sc.rng_seed = *cfg.seed;
  if (cfg.budget) sc.reap.budget.max_iterations = *cfg.budget;
  return sc;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::ofstream open_output(const CliConfig& cfg, const std::string& file) {
  fs::create_directories(cfg.output_dir);
  const fs::path path = fs::path(cfg.output_dir) / file;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

// Report files start with a timestamp line; everything after it is
// deterministic for a given scenario and flag set.
void write_report(const CliConfig& cfg, const std::string& file, const std::string& body) {
  auto out = open_output(cfg, file);
  out << "# generated " << timestamp() << '\n' << body;
  std::cout << "wrote " << (fs::path(cfg.output_dir) / file).string() << '\n';
}

std::string config_comment(const Scenario& sc) {
  std::ostringstream os;
  write_config(os, sc, "# ");
  return os.str();
}

}  // namespace

int command_solve(const CliConfig& cfg) {
  Scenario sc = load(cfg);
  sc.reap.record_trace = true;
  const PreparedScenario prepared = prepare(sc);
  const CondensedQp qp = prepared.mpc->at(sc.x0, true);
  int repairs = 0;
  const PrimalDual warm = initial_iterate(*prepared.mpc, qp, sc.reap, std::nullopt, sc.x0, repairs);
  const OracleSolution oracle = solve_exact(qp);
  const ReapResult res = run(qp, warm, sc.reap, &oracle);

  {
    auto out = open_output(cfg, "trace.csv");
    out << config_comment(sc);
    write_trace_csv(out, res.trace);
  }
  static const char* reasons[] = {"budget", "stall", "converged", "violation"};
  std::ostringstream body;
  body << "[config]\n";
  write_config(body, sc);
  body << "\n[results]\n" << std::setprecision(10);
  body << "rows = " << qp.rows() << "\ndecision variables = " << qp.dim() << '\n';
  body << "warm start repaired = " << (repairs > 0 ? "yes" : "no") << '\n';
  body << "iterations = " << res.trace.iterations << '\n';
  body << "stop reason = " << reasons[static_cast<int>(res.trace.reason)] << '\n';
  body << "cost = " << qp.cost(res.state.u) << '\n';
  body << "oracle cost = " << qp.cost(oracle.u_dagger) << '\n';
  body << "distance to oracle = " << (res.state.u - oracle.u_dagger).norm() << '\n';
  body << "oracle kkt residual = " << oracle.kkt_residual << '\n';
  body << "max row value = " << (qp.rows() ? qp.constraints.evaluate(res.state.u).maxCoeff() : 0.0) << '\n';
  body << "first input = [";
  for (int i = 0; i < sc.model.p(); ++i) body << (i ? ", " : "") << res.state.u(i);
  body << "]\n";
  write_report(cfg, "solve_report.txt", body.str());
  std::cout << body.str().substr(body.str().find("[results]"));
  return 0;
}

int command_simulate(const CliConfig& cfg) {
  const Scenario sc = load(cfg);
  const PreparedScenario prepared = prepare(sc);
  ClosedLoopOptions opt;
  opt.oracle = true;
  const Trajectory traj = run_closed_loop(prepared, opt);
  {
    auto out = open_output(cfg, "trajectory.csv");
    out << config_comment(sc);
    write_trajectory_csv(out, traj);
  }
  int violations = 0;
  long iterations = 0;
  for (size_t t = 0; t < traj.violated.size(); ++t) {
    violations += traj.violated[t];
    iterations += traj.iterations[t];
  }
  const Vector y = sc.model.C() * traj.states.back();
  std::ostringstream body;
  body << "[config]\n";
  write_config(body, sc);
  body << "\n[results]\n" << std::setprecision(10);
  body << "steps = " << traj.steps() << '\n';
  body << "violating steps = " << violations << '\n';
  body << "terminated early = " << (traj.terminated_early ? "yes" : "no") << '\n';
  body << "warm start repairs = " << traj.warm_start_repairs << '\n';
  body << "total iterations = " << iterations << '\n';
  body << "performance = " << performance_metric(traj, prepared.target, sc.Qx, sc.Qu) << '\n';
  body << "final output error = " << (y - sc.reference).norm() << '\n';
  write_report(cfg, "simulate_report.txt", body.str());
  std::cout << body.str().substr(body.str().find("[results]"));
  return 0;
}

int command_montecarlo(const CliConfig& cfg) {
  if (cfg.runs < 1) throw UsageError("--runs must be at least 1");
  const Scenario sc = load(cfg);
  const AdaptiveSigma adaptive = std::holds_alternative<AdaptiveSigma>(sc.reap.sigma_policy)
                                     ? std::get<AdaptiveSigma>(sc.reap.sigma_policy)
                                     : AdaptiveSigma{};
  std::vector<McCase> cases;
  try {
    cases = select_cases(cfg.cases, adaptive);
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  const MonteCarloReport report = monte_carlo(sc, cases, cfg.runs, sc.rng_seed);
  std::ostringstream body;
  write_montecarlo_report(body, report, sc);
  write_report(cfg, "montecarlo_report.txt", body.str());
  for (const auto& c : report.cases) {
    auto out = open_output(cfg, "montecarlo_case_" + c.spec.name + ".csv");
    out << config_comment(sc);
    write_montecarlo_csv(out, c);
  }
  std::cout << body.str().substr(body.str().find("[results]"));
  return 0;
}

int command_sweep(const CliConfig& cfg) {
  if (cfg.budgets.empty()) throw UsageError("--budgets must list at least one budget");
  for (long b : cfg.budgets) {
    if (b < 0) throw UsageError("budgets must be nonnegative");
  }
  const Scenario sc = load(cfg);
  const SweepResult result = suboptimality_sweep(sc, cfg.budgets);
  std::ostringstream body;
  write_sweep_report(body, result, sc);
  write_report(cfg, "sweep_report.txt", body.str());
  {
    auto out = open_output(cfg, "sweep.csv");
    out << config_comment(sc);
    write_sweep_csv(out, result);
  }
  std::cout << body.str().substr(body.str().find("[results]"));
  return 0;
}

int command_check(const CliConfig& cfg) {
  const Scenario sc = load(cfg);
  const auto items = run_checks(sc);
  bool ok = true;
  std::vector<std::string> failed;
  for (const auto& it : items) {
    std::cout << (it.passed ? "PASS " : "FAIL ") << it.name << ": " << it.detail << '\n';
    if (!it.passed) failed.push_back(it.name);
    ok = ok && it.passed;
  }
  static const char* all[] = {"steady_state", "admissibility", "dare_residual", "spectral_radius",
                              "omega_star", "warm_start"};
  for (size_t k = items.size(); k < std::size(all); ++k) std::cout << "SKIP " << all[k] << '\n';
  if (!ok) {
    std::cerr << "check failed:";
    for (const auto& f : failed) std::cerr << ' ' << f;
    std::cerr << '\n';
    return 1;
  }
  return 0;
}

int dispatch(const CliConfig& cfg) {
  try {
    if (cfg.command == "solve") return command_solve(cfg);
    if (cfg.command == "simulate") return command_simulate(cfg);
    if (cfg.command == "montecarlo") return command_montecarlo(cfg);
    if (cfg.command == "sweep") return command_sweep(cfg);
    if (cfg.command == "check") return command_check(cfg);
    std::cerr << "error: unknown command '" << cfg.command << "'\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const ScenarioSetupError& e) {
    std::cerr << "scenario error: " << e.what() << '\n';
    return 1;
  } catch (const InputError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace reap::cli
