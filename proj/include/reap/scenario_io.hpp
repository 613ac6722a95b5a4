// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reap/simulator.hpp"

namespace reap {

/// Parse a scenario file (TOML). `overrides` are "dotted.key=value" strings
/// applied before validation. Throws ConfigError with line and column on
/// syntax errors and with the key name on unknown or invalid entries.
Scenario parse_scenario(const std::string& path, const std::vector<std::string>& overrides = {});
Scenario parse_scenario_text(std::string_view text, const std::vector<std::string>& overrides = {},
                             const std::string& source = "<text>");

/// Every setting that affects results, as (key, value) pairs in a fixed order.
std::vector<std::pair<std::string, std::string>> config_echo(const Scenario& scenario);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace reap
