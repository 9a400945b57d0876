// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include "sacz/harness.hpp"
#include "sacz/invariants.hpp"
#include "sacz/simnet.hpp"

#include <string>
#include <vector>

namespace sacz::testing {

inline sim::Scenario scenario(Variant v, std::uint32_t f, std::uint32_t requests,
                              std::uint64_t seed = 1)
{
  sim::Scenario s;
  s.params = ProtocolParams::for_variant(v, f);
  s.workload.requests = requests;
  s.seed = seed;
  return s;
}

/// The last `count` replicas stop before sending anything.
inline void crash_backups(sim::Scenario& s, std::uint32_t count)
{
  for (std::uint32_t i = 0; i < count; ++i)
    s.faults.push_back({s.params.n - 1 - i, sim::FaultKind::Crashed, 0, 0, {}});
}

inline void byzantine(sim::Scenario& s, ReplicaId r, std::vector<std::string> scripts)
{
  s.faults.push_back({r, sim::FaultKind::Byzantine, 0, 0, std::move(scripts)});
}

/// Two partitions: the view-0 primary is cut off, then the view-1 primary.
inline sim::Scenario two_view_changes(Variant v, std::uint64_t seed)
{
  auto s = scenario(v, 1, 30, seed);
  auto r = [](ReplicaId i) { return NodeId::replica(i); };
  auto c0 = NodeId::client(0);
  s.network.partitions.push_back({{{r(0)}, {r(1), r(2), r(3), c0}}, 60, 600});
  s.network.partitions.push_back({{{r(1)}, {r(0), r(2), r(3), c0}}, 600, 2000});
  return s;
}

inline std::size_t count(const std::vector<Violation>& vs, std::string_view name)
{
  std::size_t n = 0;
  for (const auto& v : vs)
    n += v.invariant == name;
  return n;
}

inline std::size_t count_type(const Transcript& t, std::string_view type)
{
  std::size_t n = 0;
  for (const auto& r : t.records)
    n += r.value("type", "") == type;
  return n;
}

} // namespace sacz::testing
