// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "reap/simulator.hpp"

namespace reap {

/// One "<prefix>key = value" line per config_echo entry.
void write_config(std::ostream& os, const Scenario& scenario, const std::string& prefix = "");

void write_montecarlo_report(std::ostream& os, const MonteCarloReport& report, const Scenario& scenario);
void write_montecarlo_csv(std::ostream& os, const CaseResult& result);

void write_sweep_report(std::ostream& os, const SweepResult& result, const Scenario& scenario);
void write_sweep_csv(std::ostream& os, const SweepResult& result);

struct CheckItem {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Offline diagnostics: admissibility, DARE residual, spectral radius of the
/// closed loop, omega* certificate, and the initial input sequence at x0.
std::vector<CheckItem> run_checks(const Scenario& scenario);

std::string describe_policy(const SigmaPolicy& policy);

}  // namespace reap
