// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace reap {

using WarningSink = std::function<void(std::string_view)>;

/// Replace the process-wide warning sink. Passing an empty function restores
/// the default, which prints to stderr. Returns the previous sink.
WarningSink set_warning_sink(WarningSink sink);

/// Emit a warning through the current sink. Thread-safe.
void warn(std::string_view message);

}  // namespace reap
