// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include "sacz/scenario.hpp"
#include "sacz/transcript.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace YAML {
class Node;
}

namespace sacz::harness {

/// Builds a scenario from its YAML form. Unset keys take the variant's
/// defaults; unknown keys are rejected. Throws ConfigError.
sim::Scenario load_scenario(const YAML::Node& doc);
sim::Scenario parse_scenario(const std::string& yaml);
sim::Scenario load_scenario_file(const std::filesystem::path& path);

struct RequestMetrics
{
  ClientId client = 0;
  std::uint64_t request = 0;
  bool completed = false;
  std::optional<Time> latency;
  std::uint64_t messages = 0; // sends attributed to this request
  bool fallback = false;
  std::optional<View> view; // view the client completed in
};

struct RunMetrics
{
  std::string scenario;
  std::string variant;
  std::uint32_t f = 0;
  std::uint32_t n = 0;
  std::uint64_t seed = 0;
  std::vector<RequestMetrics> requests;
  std::uint64_t messages = 0; // every send in the run
  std::uint64_t completed = 0;
  std::uint64_t fallbacks = 0;
  std::optional<double> median_latency;
  std::optional<double> median_messages;
  View final_view = 0;
  std::uint64_t view_changes = 0; // distinct views installed after view 0
};

/// Derives metrics from a finished transcript; every count comes from
/// tallying its records.
RunMetrics metrics(const Transcript& t);

/// Fixed column order, shared by per-request and aggregate rows.
const std::vector<std::string>& csv_columns();
void write_csv_header(std::ostream& os);
void write_csv_rows(std::ostream& os, const RunMetrics& m);
void write_csv(std::ostream& os, const std::vector<RunMetrics>& runs);

/// "key=lo..hi" or "key=a,b,c". The key is a dotted path into the scenario
/// document, e.g. `f` or `network.jitter`.
struct SweepParam
{
  std::string key;
  std::vector<std::string> values;
};

SweepParam parse_sweep_param(const std::string& spec);

/// One scenario per combination of values, in row-major order over `params`.
std::vector<sim::Scenario> expand_sweep(const YAML::Node& doc,
                                        const std::vector<SweepParam>& params);

/// Runs every scenario, independent ones concurrently, and returns results in
/// input order.
std::vector<std::pair<RunMetrics, Transcript>>
run_suite(const std::vector<sim::Scenario>& scenarios, unsigned threads = 0);

} // namespace sacz::harness
