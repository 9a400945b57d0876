// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include "sacz/app.hpp"
#include "sacz/messages.hpp"

namespace sacz::history {

using crypto::Digest;

/// Digest of the empty history.
Digest genesis();

/// Chains one ordered request onto a history digest. Equal digests imply
/// equal histories, so clients compare histories by comparing digests.
Digest extend(const Digest& prev, View view, Counter counter,
              const Digest& request_digest);

inline Digest extend(const Digest& prev, const msg::OrderRequestMsg& m)
{
  return extend(prev, m.view, m.cert.counter, msg::request_digest(m.request));
}

struct ExecResult
{
  Bytes response;
  Digest parent;
  Digest digest;
  std::uint64_t position = 0;
  bool fresh = false; // false when the request id was already executed
};

/// Replicated state: application snapshot plus the head of the history chain.
class StateMachine
{
public:
  StateMachine() : head_(genesis()) {}

  const msg::AppSnapshot& snapshot() const { return state_; }
  const Digest& head() const { return head_; }
  std::uint64_t position() const { return position_; }

  void restore(msg::AppSnapshot snapshot, std::uint64_t position, const Digest& head)
  {
    state_ = std::move(snapshot);
    position_ = position;
    head_ = head;
  }

  /// Appends `m` to the history. A request whose id is not newer than the
  /// client's cached id occupies its slot but leaves the state untouched.
  ExecResult execute(const msg::OrderRequestMsg& m);

private:
  msg::AppSnapshot state_;
  std::uint64_t position_ = 0;
  Digest head_;
};

} // namespace sacz::history
