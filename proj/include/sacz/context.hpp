// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include "sacz/messages.hpp"
#include "sacz/types.hpp"

#include <compare>
#include <variant>

namespace sacz {

enum class Phase : std::uint8_t
{
  Active,
  ViewChanging,
};

enum class TimerKind : std::uint8_t
{
  FillHole,
  Forward,
  ViewChange,
  StateFetch,
  Client,
};

struct TimerKey
{
  TimerKind kind = TimerKind::FillHole;
  std::uint64_t a = 0;
  std::uint64_t b = 0;

  auto operator<=>(const TimerKey&) const = default;
};

// Things state machines report to whoever drives them. The simulator writes
// them to the transcript; the invariant checker reads them back.
namespace obs {

struct Exec
{
  ReplicaId replica;
  View view;
  Counter counter;
  std::uint64_t position;
  RequestKey request;
  crypto::Digest parent;
  crypto::Digest digest;
  bool replay;
};

struct Install
{
  ReplicaId replica;
  View view;
  std::uint64_t start_length;
  crypto::Digest start_digest;
  crypto::PublicKey counter_key;
  std::size_t confirms;
  ReplicaId source;
};

struct CheckpointStable
{
  ReplicaId replica;
  View view;
  Counter counter;
  std::uint64_t position;
  crypto::Digest digest;
  std::size_t signers;
  std::size_t retained; // order-requests still held at or below the checkpoint
};

struct StateTransfer
{
  ReplicaId replica;
  View view;
  Counter counter;
  std::uint64_t position;
  crypto::Digest digest;
};

struct PhaseChange
{
  ReplicaId replica;
  Phase phase;
  View view;
};

struct Submit
{
  ClientId client;
  std::uint64_t id;
};

struct Complete
{
  ClientId client;
  std::uint64_t id;
  View view;
  crypto::Digest digest;
  std::size_t matching;
  bool fallback;
  Bytes response;
};

} // namespace obs

using Observation = std::variant<obs::Exec, obs::Install, obs::CheckpointStable,
                                 obs::StateTransfer, obs::PhaseChange, obs::Submit,
                                 obs::Complete>;

/// Everything a state machine may do to the outside world.
class Context
{
public:
  virtual ~Context() = default;

  virtual Time now() const = 0;
  virtual void send(NodeId to, msg::Message m) = 0;
  /// Arms (or re-arms) the timer `key` to fire `delay` from now.
  virtual void set_timer(const TimerKey& key, Time delay) = 0;
  virtual void cancel_timer(const TimerKey& key) = 0;
  virtual void observe(Observation o) = 0;
};

/// A deterministic state machine: (state, event) -> (state', sends, timers).
class Node
{
public:
  virtual ~Node() = default;

  virtual void start() {}
  virtual void on_message(NodeId from, const msg::Message& m) = 0;
  virtual void on_timer(const TimerKey& key) = 0;
  virtual Phase phase() const { return Phase::Active; }
};

} // namespace sacz
