// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include "sacz/transcript.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace sacz {

struct Violation
{
  std::string invariant;
  std::size_t index = 0; // transcript record that exposed it
  std::string detail;
};

/// Names of every invariant check_invariants evaluates.
const std::vector<std::string>& invariant_names();

/// Prefix safety and view-change inclusion: the properties whose breach
/// means two clients saw incompatible histories.
bool is_safety_violation(const Violation& v);

/// Scans a finished transcript. Violations are data, never exceptions.
/// Replicas declared Byzantine in the header are excluded wherever a check
/// is about what correct replicas do.
std::vector<Violation> check_invariants(const Transcript& transcript);

} // namespace sacz
