// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include "sacz/config.hpp"
#include "sacz/context.hpp"
#include "sacz/history.hpp"
#include "sacz/new_view.hpp"
#include "sacz/sequencer.hpp"
#include "sacz/validation.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

namespace sacz {

/// One replica of any variant. The trusted-counter variant orders with a
/// fresh counter instance per view; the baselines order with the primary's
/// signing key (see baseline::SignedSequencer).
class Replica : public Node
{
public:
  Replica(ReplicaId id, const Genesis& genesis, crypto::KeyPair key,
          std::shared_ptr<tmc::TrustedComponent> tmc,
          std::optional<tmc::CounterInstance> view0_counter, Context& ctx);

  void on_message(NodeId from, const msg::Message& m) override;
  void on_timer(const TimerKey& key) override;
  Phase phase() const override { return phase_; }

  ReplicaId id() const { return id_; }
  View view() const { return view_; }
  View target_view() const { return phase_ == Phase::Active ? view_ : target_; }
  bool is_primary() const { return params().primary(view_) == id_; }
  const ProtocolParams& params() const { return genesis_.params; }
  const Validator& validator() const { return validator_; }

  const history::StateMachine& state() const { return sm_; }
  Counter last_executed() const { return exec_in_view_; }
  Time timeout() const { return timeout_; }
  const msg::ViewCertificate& view_certificate() const { return cert_; }
  const crypto::PublicKey& counter_key() const { return counter_key_; }
  const msg::CheckpointCertificate& stable_checkpoint() const { return stable_cert_; }
  std::uint64_t stable_position() const { return stable_pos_; }
  const std::vector<msg::OrderRequestMsg>& log() const { return log_; }
  std::size_t buffered() const { return pending_.size(); }

  /// Order-requests still held (log or hole buffer) at or below `position`.
  std::size_t retained_at_or_below(std::uint64_t position) const;

  // What a compromised host holds: its own signing key and the right to call
  // the sequencer. Never a counter instance secret.
  const crypto::KeyPair& host_key() const { return key_; }
  Sequencer* sequencer() { return sequencer_.get(); }
  const msg::NewViewMsg* new_view_for(View v) const;

private:
  struct CheckpointKey
  {
    View view;
    Counter counter;
    std::uint64_t position;
    crypto::Digest history;
    crypto::Digest state;
    crypto::Digest view_digest;

    auto operator<=>(const CheckpointKey&) const = default;
  };

  struct PendingNewView
  {
    msg::NewViewMsg message;
    NewViewState state;
    crypto::Digest digest;
  };

  struct OwnCheckpoint
  {
    msg::AppSnapshot snapshot;
    Counter counter;
    crypto::Digest digest;
    crypto::Digest state;
  };

  // Protocol steps.
  void on_request(NodeId from, const msg::RequestMsg& m);
  void on_order_request(const msg::OrderRequestMsg& m);
  void on_fill_hole(NodeId from, const msg::FillHoleMsg& m);
  void on_req_view_change(const msg::ReqViewChangeMsg& m);
  void on_view_change(const msg::ViewChangeMsg& m);
  void on_new_view(const msg::NewViewMsg& m);
  void on_view_confirm(const msg::ViewConfirmMsg& m);
  void on_checkpoint(const msg::CheckpointMsg& m);
  void on_commit(NodeId from, const msg::CommitMsg& m);
  void on_new_view_request(NodeId from, const msg::NewViewRequestMsg& m);
  void on_state_request(NodeId from, const msg::StateRequestMsg& m);
  void on_state_transfer(const msg::StateTransferMsg& m);
  void on_misbehavior_proof(const msg::MisbehaviorProofMsg& m);

  void order(const msg::RequestMsg& m);
  void execute(const msg::OrderRequestMsg& m, bool replay);
  void drain_pending();
  void request_holes(Counter upto);
  /// False (and the primary accused) if `m` does not extend our history.
  bool chains(const msg::OrderRequestMsg& m);
  void convict(msg::MisbehaviorProofMsg proof);
  void send_cached_reply(ClientId client);
  void forward(const msg::RequestMsg& m);
  void make_checkpoint();
  void check_checkpoint(const CheckpointKey& key);
  void make_stable(const CheckpointKey& key);
  void accuse(View v);
  void enter_view_change(View target);
  void start_view_change(View target, std::vector<msg::ReqViewChangeMsg> evidence);
  void send_new_view(View v);
  void check_confirms(View v);
  void install(View v, std::vector<msg::ViewConfirmMsg> confirms);
  void process_deferred();

  void broadcast(const msg::Message& m);
  void set_phase(Phase p);
  Counter stable_counter_in_view() const;
  Counter window_limit() const { return stable_counter_in_view() + params().window(); }
  const msg::OrderRequestMsg* find_order(View v, Counter c) const;
  const msg::OrderRequestMsg* find_order(const RequestKey& k) const;

  ReplicaId id_;
  const Genesis& genesis_;
  Validator validator_;
  crypto::KeyPair key_;
  std::shared_ptr<tmc::TrustedComponent> tmc_;
  Context& ctx_;

  View view_ = 0;
  View target_ = 0;
  Phase phase_ = Phase::Active;
  msg::ViewCertificate cert_;
  crypto::PublicKey counter_key_;
  Time timeout_;

  // Execution and history since the stable checkpoint.
  history::StateMachine sm_;
  Counter exec_in_view_ = 0;
  std::vector<msg::OrderRequestMsg> log_;
  std::map<Counter, msg::OrderRequestMsg> pending_; // out-of-order, current view
  std::set<Counter> requested_holes_;
  bool fill_timer_armed_ = false;
  std::map<View, std::map<Counter, msg::OrderRequestMsg>> future_;

  // Primary role.
  std::unique_ptr<Sequencer> sequencer_;
  crypto::Digest order_head_; // history our own order-requests claim
  std::map<View, std::unique_ptr<Sequencer>> next_sequencers_;
  std::map<RequestKey, msg::OrderRequestMsg> ordered_;
  std::vector<msg::RequestMsg> deferred_;

  // Commit certificates acted on in this view, by history digest.
  std::map<crypto::Digest, std::vector<msg::ReplyMsg>> commits_;

  // Requests a backup forwarded and is waiting on.
  std::map<RequestKey, msg::RequestMsg> forwarded_;

  // Checkpoints.
  msg::CheckpointCertificate stable_cert_;
  msg::AppSnapshot stable_snapshot_;
  std::uint64_t stable_pos_ = 0;
  View stable_view_ = 0;
  Counter stable_counter_ = 0;
  std::map<std::uint64_t, OwnCheckpoint> own_checkpoints_;
  std::map<CheckpointKey, std::map<ReplicaId, msg::CheckpointMsg>> checkpoint_votes_;
  std::set<std::uint64_t> fetch_armed_;

  // View change.
  std::set<View> accused_;
  std::set<View> convicted_;
  std::map<View, std::map<ReplicaId, msg::ReqViewChangeMsg>> rvcs_;
  std::map<View, std::map<ReplicaId, msg::ViewChangeMsg>> vcs_;
  std::set<View> new_view_sent_;
  std::map<View, PendingNewView> new_views_;
  std::map<View, std::map<crypto::Digest, std::map<ReplicaId, msg::ViewConfirmMsg>>>
    confirms_;
  std::set<std::pair<View, crypto::Digest>> new_view_requested_;
};

} // namespace sacz
