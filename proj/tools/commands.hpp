// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace reap::cli {

struct CliConfig {
  std::string command;
  std::string scenario_path;
  std::vector<std::string> overrides;
  std::string output_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<long> budget;
  int runs = 200;
  std::string cases = "I,II,III,IV,V";
  std::vector<long> budgets = {5, 20, 50, 100, 500};
};

// Exit codes: 0 success, 1 usage or validation error, 2 runtime failure.
int command_solve(const CliConfig& cfg);
int command_simulate(const CliConfig& cfg);
int command_montecarlo(const CliConfig& cfg);
int command_sweep(const CliConfig& cfg);
int command_check(const CliConfig& cfg);

/// Dispatch on cfg.command, mapping exceptions to exit codes.
int dispatch(const CliConfig& cfg);

}  // namespace reap::cli
