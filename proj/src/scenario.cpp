// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "sacz/scenario.hpp"

#include "sacz/adversary.hpp"

#include <algorithm>
#include <set>

namespace sacz::sim {

Time NetworkConfig::effective_gst() const
{
  Time g = gst;
  for (const auto& p : partitions)
    g = std::max(g, p.to);
  return g;
}

void Scenario::validate() const
{
  params.validate();

  std::set<ReplicaId> faulty;
  for (const auto& fault : faults)
  {
    if (fault.replica >= params.n)
      throw ConfigError("fault names replica " + std::to_string(fault.replica) +
                        " but n = " + std::to_string(params.n));
    if (fault.kind == FaultKind::TmcCrash && !params.has_tmc(fault.replica))
      throw ConfigError("tmc_crash on replica " + std::to_string(fault.replica) +
                        ", which has no trusted counter");
    if (fault.kind == FaultKind::Byzantine)
    {
      if (fault.scripts.empty())
        throw ConfigError("byzantine fault without scripts");
      for (const auto& s : fault.scripts)
      {
        try
        {
          adv::make_script(s);
        }
        catch (const std::invalid_argument& e)
        {
          throw ConfigError(e.what());
        }
      }
    }
    faulty.insert(fault.replica);
  }
  if (faulty.size() != faults.size())
    throw ConfigError("at most one fault per replica");
  if (faulty.size() > params.f)
    throw ConfigError(std::to_string(faulty.size()) + " faulty replicas exceed f = " +
                      std::to_string(params.f));

  const auto& net = network;
  if (net.bound == 0)
    throw ConfigError("network bound must be positive");
  auto worst = net.base_delay;
  for (const auto& l : net.links)
    worst = std::max(worst, l.delay);
  for (const auto& row : net.region_delays)
  {
    if (row.size() != net.region_delays.size())
      throw ConfigError("region delay matrix must be square");
    for (auto d : row)
      worst = std::max(worst, d);
  }
  for (const auto& [node, region] : net.regions)
    if (region >= net.region_delays.size())
      throw ConfigError("node " + node.str() + " assigned to unknown region");
  if (worst + net.jitter > net.bound)
    throw ConfigError("delays plus jitter exceed the post-GST bound");

  for (const auto& p : net.partitions)
  {
    if (p.to < p.from)
      throw ConfigError("partition window ends before it starts");
    std::set<NodeId> seen;
    for (const auto& g : p.groups)
      for (const auto& n : g)
        if (!seen.insert(n).second)
          throw ConfigError("partition groups overlap at " + n.str());
  }
}

const Fault* Scenario::fault_of(ReplicaId r) const
{
  for (const auto& f : faults)
    if (f.replica == r)
      return &f;
  return nullptr;
}

bool Scenario::is_byzantine(ReplicaId r) const
{
  const auto* f = fault_of(r);
  return f && f->kind == FaultKind::Byzantine;
}

} // namespace sacz::sim
