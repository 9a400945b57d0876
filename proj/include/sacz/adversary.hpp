// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include "sacz/messages.hpp"
#include "sacz/replica.hpp"

#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sacz::adv {

/// Raised when a script emits something a real adversary could not: a
/// signature under a key it does not hold.
class InvalidAdversary : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

struct Envelope
{
  NodeId to;
  msg::Message message;
  Time extra_delay = 0;
};

/// What a compromised replica can see and use. `self` is the honest core the
/// scripts sit on top of; its host key and sequencer are fair game, a
/// counter instance secret never is.
struct Env
{
  Replica& self;
  std::mt19937_64& rng;
  Time now = 0;
  const std::vector<msg::RequestMsg>& requests;  // every client request observed
  const std::vector<msg::NewViewMsg>& new_views; // every new-view observed

  bool coin(double p);
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);
};

/// Rewrites one outgoing envelope into zero or more envelopes.
class Script
{
public:
  virtual ~Script() = default;
  virtual std::string_view name() const = 0;
  virtual std::vector<Envelope> apply(Env& env, Envelope e) = 0;
};

/// Known names: drop_all, drop_selective, delay, equivocate, burn_counter,
/// stale_new_view, split_view_confirm, corrupt_reply, truncate_view_change,
/// fuzz. Throws std::invalid_argument for anything else.
std::unique_ptr<Script> make_script(std::string_view name);
const std::vector<std::string>& script_names();

} // namespace sacz::adv
