// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include "sacz/config.hpp"
#include "sacz/types.hpp"

#include <string>
#include <vector>

namespace sacz::sim {

/// Cross-group messages sent in [from, to) are held until `to`. Nodes not
/// named in any group form one implicit extra group.
struct Partition
{
  std::vector<std::vector<NodeId>> groups;
  Time from = 0;
  Time to = 0;
};

struct LinkDelay
{
  NodeId from;
  NodeId to;
  Time delay = 0;
};

struct NetworkConfig
{
  Time base_delay = 10;
  Time jitter = 2;        // uniform extra in [0, jitter]
  Time gst = 0;           // raised to the end of the last partition
  Time bound = 100;       // delay bound D after GST
  Time pre_gst_extra = 0; // uniform extra in [0, pre_gst_extra] before GST
  std::vector<std::pair<NodeId, std::uint32_t>> regions;
  std::vector<std::vector<Time>> region_delays;
  std::vector<LinkDelay> links;
  std::vector<Partition> partitions;

  /// GST actually in force: no earlier than the end of any partition.
  Time effective_gst() const;
};

enum class FaultKind
{
  Crashed,   // stops at `at`
  Slow,      // everything it sends takes `extra` longer
  Byzantine, // runs adversary `scripts` over an honest core
  TmcCrash,  // only the trusted part crashes, at `at`
};

struct Fault
{
  ReplicaId replica = 0;
  FaultKind kind = FaultKind::Crashed;
  Time at = 0;
  Time extra = 0;
  std::vector<std::string> scripts;
};

struct Workload
{
  std::uint32_t clients = 1;
  std::uint32_t requests = 1; // per client
};

struct Scenario
{
  std::string name = "scenario";
  ProtocolParams params;
  std::uint64_t seed = 1;
  NetworkConfig network;
  std::vector<Fault> faults;
  Workload workload;
  Time time_bound = 1'000'000;
  crypto::Scheme scheme = crypto::Scheme::Simulated;

  /// Throws ConfigError for inconsistent n / f / counter settings or a fault
  /// budget above f.
  void validate() const;

  const Fault* fault_of(ReplicaId r) const;
  bool is_byzantine(ReplicaId r) const;
};

} // namespace sacz::sim
