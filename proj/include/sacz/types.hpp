// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace sacz {

using ReplicaId = std::uint32_t;
using ClientId = std::uint32_t;
using View = std::uint64_t;
using Counter = std::uint64_t;
/// Logical simulation time. No wall-clock anywhere in the protocol.
using Time = std::uint64_t;

struct NodeId
{
  enum class Kind : std::uint8_t
  {
    Replica,
    Client,
  };

  Kind kind = Kind::Replica;
  std::uint32_t index = 0;

  static constexpr NodeId replica(ReplicaId i) { return {Kind::Replica, i}; }
  static constexpr NodeId client(ClientId i) { return {Kind::Client, i}; }

  bool is_replica() const { return kind == Kind::Replica; }
  bool is_client() const { return kind == Kind::Client; }

  auto operator<=>(const NodeId&) const = default;

  std::string str() const
  {
    return (is_replica() ? "r" : "c") + std::to_string(index);
  }
};

/// (client, request id): identifies one client request across the system.
struct RequestKey
{
  ClientId client = 0;
  std::uint64_t id = 0;

  auto operator<=>(const RequestKey&) const = default;
};

} // namespace sacz
