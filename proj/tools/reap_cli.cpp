// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using reap::cli::CliConfig;
  CLI::App app{"Anytime-feasible primal-dual MPC solver and closed-loop simulator"};
  app.require_subcommand(1);
  CliConfig cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("scenario", cfg.scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("--set", cfg.overrides, "Override a scenario key (key=value), repeatable");
    sub->add_option("--output", cfg.output_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "Random seed (default: scenario seed)");
    sub->add_option("--budget", cfg.budget, "Iterations per sampling instant")->check(CLI::NonNegativeNumber);
  };

  auto* solve = app.add_subcommand("solve", "Solve the QP at x0 and write the iteration trace");
  common(solve);
  auto* simulate = app.add_subcommand("simulate", "Closed-loop run from x0, writes the trajectory");
  common(simulate);
  auto* mc = app.add_subcommand("montecarlo", "Violation study over randomized initial states");
  common(mc);
  mc->add_option("--runs", cfg.runs, "Number of runs")->check(CLI::PositiveNumber)->capture_default_str();
  mc->add_option("--cases", cfg.cases, "Comma-separated cases (I..V)")->capture_default_str();
  auto* sweep = app.add_subcommand("sweep", "Suboptimality versus iteration budget");
  common(sweep);
  sweep->add_option("--budgets", cfg.budgets, "Budgets to sweep")->delimiter(',');
  auto* check = app.add_subcommand("check", "Offline scenario diagnostics");
  common(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  for (auto* sub : {solve, simulate, mc, sweep, check}) {
    if (sub->parsed()) cfg.command = sub->get_name();
  }
  return reap::cli::dispatch(cfg);
}
