// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "sacz/client.hpp"

#include "sacz/baselines.hpp"

#include <algorithm>
#include <vector>

namespace sacz {

using namespace msg;

Client::Client(ClientId id, const Genesis& genesis, crypto::KeyPair key, Context& ctx)
  : id_(id), genesis_(genesis), validator_(genesis), key_(std::move(key)), ctx_(ctx)
{}

void Client::submit(Bytes op)
{
  request_ = RequestMsg{std::move(op), id_, ++next_id_, {}};
  sign(request_, key_);
  replies_.clear();
  commit_.reset();
  local_commits_.clear();
  mode_ = Mode::Waiting;
  submitted_at_ = ctx_.now();
  timeout_ = params().client_timeout;
  ctx_.observe(obs::Submit{id_, request_.id});
  ctx_.send(NodeId::replica(params().primary(view_)), request_);
  arm(timeout_);
}

void Client::arm(Time delay)
{
  ctx_.set_timer({TimerKind::Client, request_.id}, delay);
}

void Client::broadcast_request()
{
  for (ReplicaId r = 0; r < params().n; ++r)
    ctx_.send(NodeId::replica(r), request_);
}

void Client::on_message(NodeId from, const Message& m)
{
  if (!from.is_replica())
    return;
  if (const auto* r = std::get_if<ReplyMsg>(&m))
    on_reply(*r);
  else if (const auto* lc = std::get_if<LocalCommitMsg>(&m))
    on_local_commit(*lc);
}

void Client::infer_view(ReplicaId from, View v)
{
  views_seen_[from] = v;
  // A view reported by f+1 replicas is vouched for by a correct one.
  std::vector<View> seen;
  for (const auto& [r, w] : views_seen_)
    seen.push_back(w);
  if (seen.size() < params().f + 1)
    return;
  std::nth_element(seen.begin(), seen.begin() + params().f, seen.end(), std::greater<>());
  view_ = std::max(view_, seen[params().f]);
}

void Client::on_reply(const ReplyMsg& m)
{
  if (mode_ == Mode::Idle || m.order.request != request_)
    return;
  if (!validator_.reply(m))
    return;
  infer_view(m.replica, m.order.view);
  replies_[m.replica] = m;

  std::map<crypto::Digest, std::size_t> counts;
  const ReplyMsg* best = nullptr;
  std::size_t best_count = 0;
  for (const auto& [r, reply] : replies_)
  {
    auto c = ++counts[reply_match_key(reply)];
    if (c > best_count)
    {
      best_count = c;
      best = &reply;
    }
  }
  if (best_count >= params().completion)
  {
    auto sample = *best;
    complete(sample, best_count, false);
    return;
  }
  if (params().fallback && mode_ == Mode::Waiting && best_count >= params().commit_threshold())
  {
    // Enough for a commit certificate; give the stragglers one client
    // timeout before taking the slow path.
    mode_ = Mode::Fallback;
    arm(params().client_timeout);
  }
}

void Client::on_local_commit(const LocalCommitMsg& m)
{
  if (mode_ != Mode::Committing || !commit_)
    return;
  const auto& sample = commit_->certificate.front();
  if (m.client != id_ || m.request_id != request_.id ||
      m.history_digest != sample.history_digest)
    return;
  if (!validator_.local_commit(m))
    return;
  local_commits_[m.replica] = m;
  if (local_commits_.size() >= params().commit_threshold())
    complete(sample, local_commits_.size(), true);
}

void Client::on_timer(const TimerKey& key)
{
  if (key.kind != TimerKind::Client || key.a != request_.id || mode_ == Mode::Idle)
    return;
  switch (mode_)
  {
    case Mode::Fallback:
    {
      std::vector<ReplyMsg> all;
      for (const auto& [r, reply] : replies_)
        all.push_back(reply);
      if (auto cert = baseline::commit_certificate(all, params().f))
      {
        commit_ = CommitMsg{id_, request_.id, std::move(*cert), {}};
        sign(*commit_, key_);
        for (ReplicaId r = 0; r < params().n; ++r)
          ctx_.send(NodeId::replica(r), *commit_);
        mode_ = Mode::Committing;
        arm(timeout_);
        return;
      }
      mode_ = Mode::Waiting;
      broadcast_request();
      timeout_ *= 2;
      arm(timeout_);
      return;
    }
    case Mode::Committing:
      for (ReplicaId r = 0; r < params().n; ++r)
        ctx_.send(NodeId::replica(r), *commit_);
      timeout_ *= 2;
      arm(timeout_);
      return;
    case Mode::Waiting:
      broadcast_request();
      timeout_ *= 2;
      arm(timeout_);
      return;
    case Mode::Idle:
      return;
  }
}

void Client::complete(const ReplyMsg& sample, std::size_t matching, bool fallback)
{
  ctx_.cancel_timer({TimerKind::Client, request_.id});
  mode_ = Mode::Idle;
  view_ = std::max(view_, sample.order.view);
  Completion c{request_.id,          sample.response, sample.order.view,
               sample.history_digest, fallback,        ctx_.now() - submitted_at_};
  ctx_.observe(obs::Complete{id_, c.id, c.view, c.history_digest, matching, fallback,
                             c.response});
  last_ = c;
  if (on_complete_)
    on_complete_(c);
}

} // namespace sacz
