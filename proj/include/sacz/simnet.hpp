// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include "sacz/adversary.hpp"
#include "sacz/client.hpp"
#include "sacz/config.hpp"
#include "sacz/replica.hpp"
#include "sacz/scenario.hpp"
#include "sacz/transcript.hpp"

#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <variant>
#include <vector>

namespace sacz::sim {

/// Deterministic discrete-event simulation of one scenario. Events run in
/// (time, insertion order); every source of randomness is seeded from the
/// scenario seed, so the transcript is a pure function of the scenario.
class Simulation
{
public:
  /// Throws ConfigError if the scenario is inconsistent.
  explicit Simulation(Scenario scenario);
  ~Simulation();

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Starts the nodes and the configured workload.
  void start();
  /// Processes one event. False once the run is over.
  bool step();
  /// start() followed by step() until the run is over.
  void run();
  /// Processes every event scheduled at or before `t`.
  void run_until(Time t);

  /// Submits an operation on behalf of client `c`, outside the workload.
  void submit(ClientId c, Bytes op);

  Time now() const { return now_; }
  bool finished() const;
  const Scenario& scenario() const { return scenario_; }
  const System& system() const { return system_; }
  Replica& replica(ReplicaId r);
  Client& client(ClientId c);
  std::size_t sends() const { return sends_; }

  /// Closes the transcript with an end record (once) and returns it.
  const Transcript& transcript();

private:
  class Port;
  struct Slot;

  struct Delivery
  {
    NodeId from;
    NodeId to;
    msg::Message message;
  };
  struct TimerFire
  {
    NodeId node;
    TimerKey key;
    std::uint64_t generation;
  };
  struct Action
  {
    std::function<void()> run;
  };
  using Event = std::variant<Delivery, TimerFire, Action>;

  Slot& slot(NodeId id);
  bool crashed(NodeId id, Time t) const;
  void schedule(Time at, Event e);
  void send_from(NodeId from, NodeId to, msg::Message m);
  void dispatch(NodeId from, NodeId to, msg::Message m, Time extra, bool byzantine);
  Time delay(NodeId from, NodeId to);
  std::optional<Time> partition_release(NodeId from, NodeId to) const;
  void set_timer(NodeId node, const TimerKey& key, Time delay);
  void cancel_timer(NodeId node, const TimerKey& key);
  void observe(NodeId node, const Observation& o);
  void learn(Slot& s, const msg::Message& m);
  void next_workload_request(ClientId c);
  void record_header();
  std::string counter_key_of(const msg::OrderRequestMsg& m) const;

  Scenario scenario_;
  System system_;
  Time effective_gst_;
  std::mt19937_64 net_rng_;
  std::mt19937_64 adv_rng_;
  std::vector<std::unique_ptr<Slot>> slots_;

  Time now_ = 0;
  std::uint64_t seq_ = 0;
  std::map<std::pair<Time, std::uint64_t>, Event> queue_;
  std::map<std::pair<NodeId, TimerKey>, std::uint64_t> timers_;
  std::uint64_t timer_generation_ = 0;

  std::set<crypto::PublicKey> counter_keys_;
  std::map<ClientId, std::uint32_t> issued_;
  std::map<std::pair<ClientId, std::uint64_t>, Time> submitted_at_;
  std::uint32_t outstanding_ = 0;
  Time settled_at_ = 0;
  bool started_ = false;
  bool closed_ = false;
  std::size_t sends_ = 0;
  Transcript transcript_;
};

/// Runs a scenario to completion and returns its transcript.
Transcript run(const Scenario& scenario);

} // namespace sacz::sim
