// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include "sacz/config.hpp"
#include "sacz/context.hpp"
#include "sacz/validation.hpp"

#include <functional>
#include <map>
#include <optional>

namespace sacz {

/// A sequential client: one outstanding request at a time.
class Client : public Node
{
public:
  enum class Mode
  {
    Idle,
    Waiting,    // collecting speculative replies
    Fallback,   // Zyzzyva: holding 2f+1 matching replies, waiting for the rest
    Committing, // Zyzzyva: commit certificate sent, collecting local commits
  };

  struct Completion
  {
    std::uint64_t id = 0;
    Bytes response;
    View view = 0;
    crypto::Digest history_digest;
    bool fallback = false;
    Time latency = 0;
  };

  Client(ClientId id, const Genesis& genesis, crypto::KeyPair key, Context& ctx);

  /// Sends the next request to the primary the client believes in.
  void submit(Bytes op);

  void on_message(NodeId from, const msg::Message& m) override;
  void on_timer(const TimerKey& key) override;

  bool idle() const { return mode_ == Mode::Idle; }
  Mode mode() const { return mode_; }
  View believed_view() const { return view_; }
  std::uint64_t last_id() const { return next_id_; }
  Time current_timeout() const { return timeout_; }
  const std::optional<Completion>& last_completion() const { return last_; }

  void on_complete(std::function<void(const Completion&)> cb) { on_complete_ = std::move(cb); }

private:
  void on_reply(const msg::ReplyMsg& m);
  void on_local_commit(const msg::LocalCommitMsg& m);
  void complete(const msg::ReplyMsg& sample, std::size_t matching, bool fallback);
  void broadcast_request();
  void arm(Time delay);
  void infer_view(ReplicaId from, View v);
  const ProtocolParams& params() const { return genesis_.params; }

  ClientId id_;
  const Genesis& genesis_;
  Validator validator_;
  crypto::KeyPair key_;
  Context& ctx_;

  Mode mode_ = Mode::Idle;
  View view_ = 0;
  std::uint64_t next_id_ = 0;
  Time timeout_ = 0;
  Time submitted_at_ = 0;
  msg::RequestMsg request_;
  std::map<ReplicaId, msg::ReplyMsg> replies_;
  std::map<ReplicaId, View> views_seen_;
  std::optional<msg::CommitMsg> commit_;
  std::map<ReplicaId, msg::LocalCommitMsg> local_commits_;
  std::optional<Completion> last_;
  std::function<void(const Completion&)> on_complete_;
};

} // namespace sacz
