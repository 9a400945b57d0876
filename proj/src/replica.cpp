// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "sacz/replica.hpp"

#include "sacz/baselines.hpp"

#include <algorithm>

namespace sacz {

using namespace msg;

Replica::Replica(ReplicaId id, const Genesis& genesis, crypto::KeyPair key,
                 std::shared_ptr<tmc::TrustedComponent> tmc,
                 std::optional<tmc::CounterInstance> view0_counter, Context& ctx)
  : id_(id),
    genesis_(genesis),
    validator_(genesis),
    key_(std::move(key)),
    tmc_(std::move(tmc)),
    ctx_(ctx),
    cert_(genesis.view0),
    timeout_(genesis.params.replica_timeout)
{
  counter_key_ = validator_.counter_key(cert_);
  order_head_ = cert_.start_digest;
  if (params().primary(0) == id_)
  {
    if (params().uses_tmc())
    {
      if (view0_counter)
        sequencer_ = std::make_unique<CounterSequencer>(std::move(*view0_counter));
    }
    else
    {
      sequencer_ = std::make_unique<baseline::SignedSequencer>(key_);
    }
  }
}

void Replica::on_message(NodeId from, const Message& m)
{
  std::visit(
    [&](const auto& x) {
      using T = std::decay_t<decltype(x)>;
      if constexpr (std::is_same_v<T, RequestMsg>)
        on_request(from, x);
      else if constexpr (std::is_same_v<T, OrderRequestMsg>)
        on_order_request(x);
      else if constexpr (std::is_same_v<T, FillHoleMsg>)
        on_fill_hole(from, x);
      else if constexpr (std::is_same_v<T, ReqViewChangeMsg>)
        on_req_view_change(x);
      else if constexpr (std::is_same_v<T, ViewChangeMsg>)
        on_view_change(x);
      else if constexpr (std::is_same_v<T, NewViewMsg>)
        on_new_view(x);
      else if constexpr (std::is_same_v<T, ViewConfirmMsg>)
        on_view_confirm(x);
      else if constexpr (std::is_same_v<T, CheckpointMsg>)
        on_checkpoint(x);
      else if constexpr (std::is_same_v<T, CommitMsg>)
        on_commit(from, x);
      else if constexpr (std::is_same_v<T, NewViewRequestMsg>)
        on_new_view_request(from, x);
      else if constexpr (std::is_same_v<T, StateRequestMsg>)
        on_state_request(from, x);
      else if constexpr (std::is_same_v<T, StateTransferMsg>)
        on_state_transfer(x);
      else if constexpr (std::is_same_v<T, MisbehaviorProofMsg>)
        on_misbehavior_proof(x);
      // Replies and local commits are client-bound; replicas ignore them.
    },
    m);
}

void Replica::on_timer(const TimerKey& key)
{
  switch (key.kind)
  {
    case TimerKind::FillHole:
    {
      fill_timer_armed_ = false;
      if (key.a != view_ || phase_ != Phase::Active || pending_.empty())
        return;
      // The primary stayed silent; ask everyone, then accuse it.
      for (Counter i = exec_in_view_ + 1; i < pending_.rbegin()->first; ++i)
        if (!pending_.count(i))
          for (ReplicaId r = 0; r < params().n; ++r)
            if (r != id_)
              ctx_.send(NodeId::replica(r), FillHoleMsg{view_, i, id_});
      accuse(view_);
      return;
    }
    case TimerKind::Forward:
    {
      RequestKey k{static_cast<ClientId>(key.a), key.b};
      auto it = forwarded_.find(k);
      if (it == forwarded_.end() || phase_ != Phase::Active)
        return;
      auto m = it->second;
      accuse(view_);
      for (ReplicaId r = 0; r < params().n; ++r)
        if (r != id_)
          ctx_.send(NodeId::replica(r), m);
      return;
    }
    case TimerKind::ViewChange:
      if (phase_ == Phase::ViewChanging && target_ == key.a)
        accuse(target_);
      return;
    case TimerKind::StateFetch:
    {
      std::uint64_t position = key.a;
      fetch_armed_.erase(position);
      if (sm_.position() >= position || phase_ != Phase::Active)
        return;
      for (const auto& [ck, votes] : checkpoint_votes_)
      {
        if (ck.position != position || ck.view != view_ || votes.size() < params().quorum())
          continue;
        for (const auto& [r, m] : votes)
          if (r != id_)
            ctx_.send(NodeId::replica(r), StateRequestMsg{view_, position, id_});
        return;
      }
      return;
    }
    case TimerKind::Client:
      return;
  }
}

const NewViewMsg* Replica::new_view_for(View v) const
{
  auto it = new_views_.find(v);
  return it == new_views_.end() ? nullptr : &it->second.message;
}

std::size_t Replica::retained_at_or_below(std::uint64_t position) const
{
  std::size_t n = 0;
  if (position > stable_pos_)
    n += std::min<std::uint64_t>(log_.size(), position - stable_pos_);
  if (stable_view_ == view_ && stable_pos_ == position)
    n += std::distance(pending_.begin(), pending_.upper_bound(stable_counter_));
  return n;
}

// ---- normal case ----

void Replica::on_request(NodeId from, const RequestMsg& m)
{
  if (!validator_.request(m))
    return;
  if (phase_ != Phase::Active)
  {
    forwarded_.emplace(m.key(), m); // resumed after the view is installed
    return;
  }
  const auto& clients = sm_.snapshot().clients;
  if (auto it = clients.find(m.client); it != clients.end())
  {
    if (m.id < it->second.id)
      return;
    if (m.id == it->second.id)
    {
      send_cached_reply(m.client);
      return;
    }
  }
  if (is_primary())
  {
    if (auto it = ordered_.find(m.key()); it != ordered_.end())
    {
      if (from.is_replica() && from.index != id_)
        ctx_.send(from, it->second);
      else
        broadcast(it->second);
      return;
    }
    order(m);
    return;
  }
  if (const auto* o = find_order(m.key()))
  {
    if (from.is_replica())
      ctx_.send(from, *o);
    return;
  }
  forward(m);
}

void Replica::forward(const RequestMsg& m)
{
  if (!forwarded_.emplace(m.key(), m).second)
    return;
  ctx_.send(NodeId::replica(params().primary(view_)), m);
  ctx_.set_timer({TimerKind::Forward, m.client, m.id}, timeout_);
}

void Replica::order(const RequestMsg& m)
{
  if (!sequencer_)
    return;
  if (sequencer_->value() + 1 > window_limit())
  {
    bool queued = std::any_of(deferred_.begin(), deferred_.end(),
                              [&](const auto& d) { return d.key() == m.key(); });
    if (!queued)
      deferred_.push_back(m);
    return;
  }
  tmc::OrderingCertificate cert;
  try
  {
    cert = sequencer_->next(request_digest(m));
  }
  catch (const tmc::TmcError&)
  {
    return; // crashed counter: stay silent, backups will time out
  }
  OrderRequestMsg o{view_, cert, m, {}, {}};
  o.history = history::extend(order_head_, o);
  order_head_ = o.history;
  sign(o, key_);
  ordered_.emplace(m.key(), o);
  broadcast(o);
}

void Replica::process_deferred()
{
  if (!sequencer_ || phase_ != Phase::Active)
    return;
  auto queue = std::move(deferred_);
  deferred_.clear();
  const auto& clients = sm_.snapshot().clients;
  for (const auto& m : queue)
  {
    auto it = clients.find(m.client);
    if (it != clients.end() && it->second.id >= m.id)
      continue;
    if (ordered_.count(m.key()))
      continue;
    order(m);
  }
}

void Replica::on_order_request(const OrderRequestMsg& m)
{
  if (m.view > view_)
  {
    auto& slot = future_[m.view];
    if (slot.size() < 4 * params().window())
      slot.emplace(m.cert.counter, m);
    return;
  }
  if (m.view < view_ || phase_ != Phase::Active)
    return;
  if (!validator_.order_request(m, counter_key_))
    return;
  auto c = m.cert.counter;
  if (c <= exec_in_view_)
  {
    const auto* mine = find_order(view_, c);
    if (mine && order_digest(*mine) != order_digest(m))
      convict(MisbehaviorProofMsg{*mine, m, id_});
    return;
  }
  if (c > window_limit())
    return;
  if (c == exec_in_view_ + 1)
  {
    if (!chains(m))
      return;
    execute(m, false);
    drain_pending();
    return;
  }
  pending_.emplace(c, m);
  request_holes(c);
}

void Replica::drain_pending()
{
  for (auto it = pending_.find(exec_in_view_ + 1); it != pending_.end();
       it = pending_.find(exec_in_view_ + 1))
  {
    auto m = std::move(it->second);
    pending_.erase(it);
    if (!chains(m))
      return;
    execute(m, false);
    if (phase_ != Phase::Active)
      return;
  }
  pending_.erase(pending_.begin(), pending_.upper_bound(exec_in_view_));
  if (pending_.empty())
  {
    requested_holes_.clear();
    if (fill_timer_armed_)
    {
      ctx_.cancel_timer({TimerKind::FillHole, view_});
      fill_timer_armed_ = false;
    }
  }
  else
  {
    request_holes(pending_.rbegin()->first);
  }
}

bool Replica::chains(const OrderRequestMsg& m)
{
  if (m.history == history::extend(sm_.head(), m))
    return true;
  MisbehaviorProofMsg proof{std::nullopt, m, id_};
  if (m.cert.counter > 1)
  {
    const auto* prev = find_order(view_, m.cert.counter - 1);
    if (!prev)
    {
      accuse(view_); // history since a state transfer; nothing to show others
      return false;
    }
    proof.previous = *prev;
  }
  convict(std::move(proof));
  return false;
}

void Replica::convict(MisbehaviorProofMsg proof)
{
  if (!convicted_.insert(view_).second)
    return;
  broadcast(proof);
  accuse(view_);
}

void Replica::on_misbehavior_proof(const MisbehaviorProofMsg& m)
{
  if (phase_ != Phase::Active || m.order.view != view_)
    return;
  if (!validator_.misbehavior_proof(m, cert_))
    return;
  accuse(view_);
}

void Replica::request_holes(Counter upto)
{
  auto primary = NodeId::replica(params().primary(view_));
  for (Counter i = exec_in_view_ + 1; i < upto; ++i)
    if (!pending_.count(i) && requested_holes_.insert(i).second)
      ctx_.send(primary, FillHoleMsg{view_, i, id_});
  if (!fill_timer_armed_)
  {
    ctx_.set_timer({TimerKind::FillHole, view_}, timeout_);
    fill_timer_armed_ = true;
  }
}

void Replica::on_fill_hole(NodeId from, const FillHoleMsg& m)
{
  if (!from.is_replica() || m.index < 1)
    return;
  if (const auto* o = find_order(m.view, m.index))
    ctx_.send(from, *o);
}

const OrderRequestMsg* Replica::find_order(View v, Counter c) const
{
  for (auto it = log_.rbegin(); it != log_.rend(); ++it)
    if (it->view == v && it->cert.counter == c)
      return &*it;
  if (v == view_)
    if (auto it = pending_.find(c); it != pending_.end())
      return &it->second;
  return nullptr;
}

const OrderRequestMsg* Replica::find_order(const RequestKey& k) const
{
  for (const auto& [c, o] : pending_)
    if (o.request.key() == k)
      return &o;
  return nullptr;
}

void Replica::execute(const OrderRequestMsg& m, bool replay)
{
  auto r = sm_.execute(m);
  log_.push_back(m);
  if (!replay)
    exec_in_view_ = m.cert.counter;
  ctx_.observe(obs::Exec{id_, m.view, m.cert.counter, r.position, m.request.key(),
                         r.parent, r.digest, replay});

  auto key = m.request.key();
  if (forwarded_.erase(key))
    ctx_.cancel_timer({TimerKind::Forward, key.client, key.id});
  if (replay)
    return;

  if (r.fresh)
  {
    ReplyMsg reply{m, r.response, r.digest, id_, {}};
    sign(reply, key_);
    ctx_.send(NodeId::client(m.request.client), std::move(reply));
  }
  if (exec_in_view_ % params().checkpoint_interval == 0)
    make_checkpoint();
}

void Replica::send_cached_reply(ClientId client)
{
  const auto& rec = sm_.snapshot().clients.at(client);
  ReplyMsg reply{rec.order, rec.response, rec.history_digest, id_, {}};
  sign(reply, key_);
  ctx_.send(NodeId::client(client), std::move(reply));
}

void Replica::on_commit(NodeId from, const CommitMsg& m)
{
  if (!params().fallback || !from.is_client() || phase_ != Phase::Active)
    return;
  if (!validator_.commit(m))
    return;
  const auto& clients = sm_.snapshot().clients;
  auto it = clients.find(m.client);
  const ClientRecord* rec = it == clients.end() ? nullptr : &it->second;
  if (!baseline::consistent_with_history(m, rec))
    return;
  commits_[rec->history_digest] = m.certificate;
  LocalCommitMsg lc{view_, m.client, m.request_id, rec->history_digest, id_, {}};
  sign(lc, key_);
  ctx_.send(NodeId::client(m.client), std::move(lc));
}

// ---- checkpoints ----

Counter Replica::stable_counter_in_view() const
{
  return stable_view_ == view_ ? stable_counter_ : 0;
}

void Replica::make_checkpoint()
{
  auto state_digest = snapshot_digest(sm_.snapshot());
  own_checkpoints_[sm_.position()] =
    OwnCheckpoint{sm_.snapshot(), exec_in_view_, sm_.head(), state_digest};
  CheckpointMsg cp{view_,       exec_in_view_,
                   sm_.position(), sm_.head(),
                   state_digest, new_view_summary_digest(cert_),
                   id_,          {}};
  sign(cp, key_);
  broadcast(cp);
}

void Replica::on_checkpoint(const CheckpointMsg& m)
{
  if (m.view != view_ || m.position <= stable_pos_)
    return;
  if (!validator_.checkpoint(m))
    return;
  CheckpointKey key{m.view,           m.counter,      m.position,
                    m.history_digest, m.state_digest, m.view_digest};
  checkpoint_votes_[key].emplace(m.replica, m);
  check_checkpoint(key);
}

void Replica::check_checkpoint(const CheckpointKey& key)
{
  const auto& votes = checkpoint_votes_[key];
  if (votes.size() < params().quorum() || key.view != view_ || key.position <= stable_pos_)
    return;
  auto own = own_checkpoints_.find(key.position);
  if (own != own_checkpoints_.end())
  {
    if (own->second.digest == key.history && own->second.state == key.state)
      make_stable(key);
    return;
  }
  if (sm_.position() < key.position && fetch_armed_.insert(key.position).second)
    ctx_.set_timer({TimerKind::StateFetch, key.position}, timeout_);
}

void Replica::make_stable(const CheckpointKey& key)
{
  CheckpointCertificate cert;
  for (const auto& [r, m] : checkpoint_votes_[key])
  {
    cert.messages.push_back(m);
    if (cert.messages.size() == params().quorum())
      break;
  }
  auto own = std::move(own_checkpoints_.at(key.position));

  auto drop = std::min<std::uint64_t>(log_.size(), key.position - stable_pos_);
  log_.erase(log_.begin(), log_.begin() + static_cast<std::ptrdiff_t>(drop));
  stable_cert_ = std::move(cert);
  stable_snapshot_ = std::move(own.snapshot);
  stable_pos_ = key.position;
  stable_view_ = key.view;
  stable_counter_ = key.counter;

  own_checkpoints_.erase(own_checkpoints_.begin(), own_checkpoints_.upper_bound(key.position));
  std::erase_if(checkpoint_votes_,
                [&](const auto& kv) { return kv.first.position <= key.position; });
  pending_.erase(pending_.begin(), pending_.upper_bound(key.counter));
  std::erase_if(ordered_,
                [&](const auto& kv) { return kv.second.cert.counter <= key.counter; });

  ctx_.observe(obs::CheckpointStable{id_, key.view, key.counter, key.position, key.history,
                                     stable_cert_.messages.size(),
                                     retained_at_or_below(key.position)});
  process_deferred();
}

void Replica::on_state_request(NodeId from, const StateRequestMsg& m)
{
  if (!from.is_replica() || stable_cert_.is_genesis() || stable_pos_ < m.position)
    return;
  ctx_.send(from, StateTransferMsg{stable_cert_, stable_snapshot_, id_});
}

void Replica::on_state_transfer(const StateTransferMsg& m)
{
  if (phase_ != Phase::Active || m.checkpoint.is_genesis())
    return;
  auto cp = checkpoint_point(m.checkpoint);
  if (cp.view != view_ || cp.position <= sm_.position())
    return;
  if (m.checkpoint.messages.front().view_digest != new_view_summary_digest(cert_))
    return;
  if (!validator_.checkpoint_certificate(m.checkpoint) ||
      snapshot_digest(m.snapshot) != cp.state_digest)
    return;

  sm_.restore(m.snapshot, cp.position, cp.history_digest);
  log_.clear();
  stable_cert_ = m.checkpoint;
  stable_snapshot_ = m.snapshot;
  stable_pos_ = cp.position;
  stable_view_ = cp.view;
  stable_counter_ = cp.counter;
  exec_in_view_ = cp.counter;
  own_checkpoints_.clear();
  commits_.clear();
  std::erase_if(checkpoint_votes_,
                [&](const auto& kv) { return kv.first.position <= cp.position; });

  const auto& clients = sm_.snapshot().clients;
  for (auto it = forwarded_.begin(); it != forwarded_.end();)
  {
    auto c = clients.find(it->first.client);
    if (c != clients.end() && c->second.id >= it->first.id)
    {
      ctx_.cancel_timer({TimerKind::Forward, it->first.client, it->first.id});
      it = forwarded_.erase(it);
    }
    else
    {
      ++it;
    }
  }
  ctx_.observe(obs::StateTransfer{id_, cp.view, cp.counter, cp.position, cp.history_digest});
  drain_pending();
}

// ---- view change ----

void Replica::accuse(View v)
{
  if (!accused_.insert(v).second)
    return;
  ReqViewChangeMsg m{v, id_, {}};
  sign(m, key_);
  broadcast(m);
}

void Replica::on_req_view_change(const ReqViewChangeMsg& m)
{
  if (m.view < view_ || !validator_.req_view_change(m))
    return;
  auto& accusers = rvcs_[m.view];
  accusers.emplace(m.replica, m);
  if (accusers.size() < params().accuse_threshold() || m.view + 1 <= target_view())
    return;
  std::vector<ReqViewChangeMsg> evidence;
  for (const auto& [r, x] : accusers)
  {
    evidence.push_back(x);
    if (evidence.size() == params().accuse_threshold())
      break;
  }
  start_view_change(m.view + 1, std::move(evidence));
}

void Replica::enter_view_change(View target)
{
  target_ = target;
  timeout_ *= 2;
  if (fill_timer_armed_)
  {
    ctx_.cancel_timer({TimerKind::FillHole, view_});
    fill_timer_armed_ = false;
  }
  for (const auto& [k, m] : forwarded_)
    ctx_.cancel_timer({TimerKind::Forward, k.client, k.id});
  pending_.clear();
  requested_holes_.clear();
  set_phase(Phase::ViewChanging);
  ctx_.set_timer({TimerKind::ViewChange, target}, timeout_);
}

void Replica::start_view_change(View target, std::vector<ReqViewChangeMsg> evidence)
{
  enter_view_change(target);
  ViewChangeMsg vc{target,           id_, cert_, stable_cert_, stable_snapshot_, log_,
                   std::move(evidence), {}, {}};
  // Carry the commit certificate for the furthest position we committed.
  auto digest = checkpoint_point(stable_cert_).history_digest;
  if (auto it = commits_.find(digest); it != commits_.end())
    vc.commit_certificate = it->second;
  for (const auto& o : log_)
  {
    digest = history::extend(digest, o);
    if (auto it = commits_.find(digest); it != commits_.end())
      vc.commit_certificate = it->second;
  }
  sign(vc, key_);
  broadcast(vc);
}

void Replica::on_view_change(const ViewChangeMsg& m)
{
  if (m.new_view <= view_)
    return;
  bool join = m.new_view > target_view();
  bool lead = params().primary(m.new_view) == id_ && !new_view_sent_.count(m.new_view) &&
              m.new_view >= target_view();
  if (!join && !lead)
    return;
  if (!validator_.view_change(m))
    return;
  if (join)
    start_view_change(m.new_view, m.evidence);
  if (params().primary(m.new_view) != id_ || new_view_sent_.count(m.new_view))
    return;
  auto& got = vcs_[m.new_view];
  got.emplace(m.replica, m);
  if (got.size() >= params().quorum())
    send_new_view(m.new_view);
}

void Replica::send_new_view(View v)
{
  new_view_sent_.insert(v);
  std::optional<CounterAttestation> attestation;
  std::unique_ptr<Sequencer> seq;
  if (params().uses_tmc())
  {
    if (!tmc_)
      return;
    try
    {
      auto [instance, att] = tmc_->init();
      attestation = att;
      seq = std::make_unique<CounterSequencer>(std::move(instance));
    }
    catch (const tmc::TmcError&)
    {
      return; // no working counter: the next view's primary takes over
    }
  }
  else
  {
    seq = std::make_unique<baseline::SignedSequencer>(key_);
  }
  next_sequencers_[v] = std::move(seq);

  NewViewMsg nv{v, attestation, {}, id_, {}};
  for (const auto& [r, vc] : vcs_[v])
  {
    nv.view_changes.push_back(vc);
    if (nv.view_changes.size() == params().quorum())
      break;
  }
  sign(nv, key_);
  broadcast(nv);
}

void Replica::on_new_view(const NewViewMsg& m)
{
  if (m.view <= view_ || m.view < target_view())
    return;
  auto existing = new_views_.find(m.view);
  if (existing != new_views_.end() && existing->second.message == m)
    return;
  auto st = compute_new_view_state(m, validator_);
  if (!st)
    return;
  auto digest = st->summary_digest();

  if (existing != new_views_.end())
  {
    // Only the first new-view gets our confirm. A different one is kept only
    // when a confirm quorum already backs it, so we can install it.
    const auto& votes = confirms_[m.view][digest];
    if (existing->second.digest == digest || votes.size() < params().quorum())
      return;
    existing->second = PendingNewView{m, std::move(*st), digest};
    check_confirms(m.view);
    return;
  }

  new_views_.emplace(m.view, PendingNewView{m, std::move(*st), digest});
  if (m.view > target_view())
    enter_view_change(m.view);
  ViewConfirmMsg c{m.view, id_, digest, {}};
  sign(c, key_);
  broadcast(c);
  check_confirms(m.view);
}

void Replica::on_view_confirm(const ViewConfirmMsg& m)
{
  if (m.view <= view_ || !validator_.view_confirm(m))
    return;
  confirms_[m.view][m.new_view_digest].emplace(m.replica, m);
  check_confirms(m.view);
}

void Replica::check_confirms(View v)
{
  if (v <= view_ || v < target_view())
    return;
  auto cit = confirms_.find(v);
  if (cit == confirms_.end())
    return;
  for (const auto& [digest, by] : cit->second)
  {
    if (by.size() < params().quorum())
      continue;
    auto nv = new_views_.find(v);
    if (nv != new_views_.end() && nv->second.digest == digest)
    {
      std::vector<ViewConfirmMsg> quorum;
      for (const auto& [r, c] : by)
      {
        quorum.push_back(c);
        if (quorum.size() == params().quorum())
          break;
      }
      install(v, std::move(quorum));
      return;
    }
    if (new_view_requested_.insert({v, digest}).second)
      for (const auto& [r, c] : by)
        if (r != id_)
          ctx_.send(NodeId::replica(r), NewViewRequestMsg{v, digest, id_});
  }
}

void Replica::on_new_view_request(NodeId from, const NewViewRequestMsg& m)
{
  if (!from.is_replica())
    return;
  auto it = new_views_.find(m.view);
  if (it != new_views_.end() && it->second.digest == m.new_view_digest)
    ctx_.send(from, it->second.message);
}

void Replica::install(View v, std::vector<ViewConfirmMsg> confirms)
{
  auto pnv = std::move(new_views_.at(v));
  const auto& st = pnv.state;

  // Roll back to the adopted checkpoint and replay the adopted sequence.
  auto cp = checkpoint_point(st.checkpoint);
  sm_.restore(st.snapshot, cp.position, cp.history_digest);
  log_.clear();
  stable_cert_ = st.checkpoint;
  stable_snapshot_ = st.snapshot;
  stable_pos_ = cp.position;
  stable_view_ = cp.view;
  stable_counter_ = cp.counter;
  for (const auto& e : st.replay)
    execute(e, true);

  cert_ = ViewCertificate{v, st.attestation, st.start_digest, st.start_length,
                          std::move(confirms)};
  counter_key_ = validator_.counter_key(cert_);
  order_head_ = cert_.start_digest;
  view_ = v;
  target_ = v;
  exec_in_view_ = 0;
  pending_.clear();
  requested_holes_.clear();
  if (fill_timer_armed_)
  {
    ctx_.cancel_timer({TimerKind::FillHole, view_});
    fill_timer_armed_ = false;
  }
  own_checkpoints_.clear();
  checkpoint_votes_.clear();
  fetch_armed_.clear();
  ordered_.clear();
  commits_.clear();

  sequencer_.reset();
  if (params().primary(v) == id_)
    if (auto it = next_sequencers_.find(v); it != next_sequencers_.end())
      sequencer_ = std::move(it->second);
  next_sequencers_.erase(next_sequencers_.begin(), next_sequencers_.upper_bound(v));

  rvcs_.erase(rvcs_.begin(), rvcs_.lower_bound(v));
  vcs_.erase(vcs_.begin(), vcs_.upper_bound(v));
  confirms_.erase(confirms_.begin(), confirms_.upper_bound(v));
  new_views_.erase(new_views_.begin(), new_views_.upper_bound(v));
  new_views_.emplace(v, std::move(pnv));
  std::erase_if(new_view_requested_, [&](const auto& p) { return p.first <= v; });

  ctx_.observe(obs::Install{id_, v, cert_.start_length, cert_.start_digest, counter_key_,
                            cert_.confirms.size(), new_views_.at(v).state.source});
  set_phase(Phase::Active);

  auto future = std::move(future_[v]);
  future_.erase(future_.begin(), future_.upper_bound(v));
  for (const auto& [c, o] : future)
    on_order_request(o);

  // Requests that arrived during the view change, or were waiting on the old
  // primary, go to the new one.
  auto waiting = std::move(forwarded_);
  forwarded_.clear();
  for (auto& d : deferred_)
    waiting.emplace(d.key(), d);
  deferred_.clear();
  const auto& clients = sm_.snapshot().clients;
  for (const auto& [k, m] : waiting)
  {
    auto c = clients.find(k.client);
    if (c != clients.end() && c->second.id >= k.id)
      continue;
    if (is_primary())
    {
      if (!ordered_.count(k))
        order(m);
    }
    else
    {
      forward(m);
    }
  }
}

// ---- plumbing ----

void Replica::broadcast(const Message& m)
{
  for (ReplicaId r = 0; r < params().n; ++r)
    ctx_.send(NodeId::replica(r), m);
}

void Replica::set_phase(Phase p)
{
  phase_ = p;
  ctx_.observe(obs::PhaseChange{id_, p, target_view()});
}

} // namespace sacz
