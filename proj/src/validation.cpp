// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "sacz/validation.hpp"

#include "sacz/history.hpp"

#include <algorithm>
#include <set>

namespace sacz {

using namespace msg;

std::string_view reason_name(Reason r)
{
  switch (r)
  {
    case Reason::Ok: return "Ok";
    case Reason::BadSignature: return "BadSignature";
    case Reason::WrongView: return "WrongView";
    case Reason::InsufficientQuorum: return "InsufficientQuorum";
    case Reason::DuplicateSigner: return "DuplicateSigner";
    case Reason::BadAttestation: return "BadAttestation";
    case Reason::DigestMismatch: return "DigestMismatch";
    case Reason::Malformed: return "Malformed";
  }
  return "Unknown";
}

CheckpointPoint checkpoint_point(const CheckpointCertificate& c)
{
  if (c.is_genesis())
  {
    static const Digest empty_state = snapshot_digest(AppSnapshot{});
    return {0, 0, 0, history::genesis(), empty_state};
  }
  const auto& m = c.messages.front();
  return {m.view, m.counter, m.position, m.history_digest, m.state_digest};
}

namespace {

// Counts distinct signers, failing on the first duplicate.
template <typename Range, typename IdOf>
Verdict distinct_signers(const Range& msgs, IdOf id_of, std::uint32_t needed)
{
  std::set<ReplicaId> seen;
  for (const auto& m : msgs)
    if (!seen.insert(id_of(m)).second)
      return Verdict::fail(Reason::DuplicateSigner);
  if (seen.size() < needed)
    return Verdict::fail(Reason::InsufficientQuorum,
                         std::to_string(seen.size()) + " < " + std::to_string(needed));
  return Verdict::ok();
}

bool same_checkpoint(const CheckpointMsg& a, const CheckpointMsg& b)
{
  return a.view == b.view && a.counter == b.counter && a.position == b.position &&
         a.history_digest == b.history_digest && a.state_digest == b.state_digest &&
         a.view_digest == b.view_digest;
}

} // namespace

crypto::PublicKey Validator::counter_key(const ViewCertificate& cert) const
{
  if (params().uses_tmc() && cert.attestation)
    return cert.attestation->instance_key;
  return genesis_->replica_keys.at(params().primary(cert.view));
}

Verdict Validator::request(const RequestMsg& m) const
{
  if (!client_in_range(m.client))
    return Verdict::fail(Reason::Malformed, "unknown client");
  if (m.id == 0)
    return Verdict::fail(Reason::Malformed, "request id must be positive");
  if (!crypto::verify(genesis_->client_keys[m.client], signing_payload(m), m.signature))
    return Verdict::fail(Reason::BadSignature, "request");
  return Verdict::ok();
}

Verdict Validator::order_request(const OrderRequestMsg& m,
                                 const crypto::PublicKey& ckey) const
{
  auto primary = params().primary(m.view);
  if (!crypto::verify(genesis_->replica_keys[primary], signing_payload(m), m.signature))
    return Verdict::fail(Reason::BadSignature, "order-request");
  if (m.cert.message_digest != request_digest(m.request))
    return Verdict::fail(Reason::DigestMismatch, "certificate does not bind request");
  if (!tmc::verify_certificate(ckey, m.cert))
    return Verdict::fail(Reason::BadSignature, "ordering certificate");
  return request(m.request);
}

Verdict Validator::reply(const ReplyMsg& m) const
{
  if (!replica_in_range(m.replica))
    return Verdict::fail(Reason::Malformed, "unknown replica");
  if (!crypto::verify(genesis_->replica_keys[m.replica], signing_payload(m), m.signature))
    return Verdict::fail(Reason::BadSignature, "reply");
  return Verdict::ok();
}

Verdict Validator::req_view_change(const ReqViewChangeMsg& m) const
{
  if (!replica_in_range(m.replica))
    return Verdict::fail(Reason::Malformed, "unknown replica");
  if (!crypto::verify(genesis_->replica_keys[m.replica], signing_payload(m), m.signature))
    return Verdict::fail(Reason::BadSignature, "req-view-change");
  return Verdict::ok();
}

Verdict Validator::view_confirm(const ViewConfirmMsg& m) const
{
  if (!replica_in_range(m.replica))
    return Verdict::fail(Reason::Malformed, "unknown replica");
  if (!crypto::verify(genesis_->replica_keys[m.replica], signing_payload(m), m.signature))
    return Verdict::fail(Reason::BadSignature, "view-confirm");
  return Verdict::ok();
}

Verdict Validator::checkpoint(const CheckpointMsg& m) const
{
  if (!replica_in_range(m.replica))
    return Verdict::fail(Reason::Malformed, "unknown replica");
  if (!crypto::verify(genesis_->replica_keys[m.replica], signing_payload(m), m.signature))
    return Verdict::fail(Reason::BadSignature, "checkpoint");
  return Verdict::ok();
}

Verdict Validator::checkpoint_certificate(const CheckpointCertificate& c) const
{
  if (c.is_genesis())
    return Verdict::ok();
  if (auto v = distinct_signers(c.messages, [](const auto& m) { return m.replica; },
                                params().quorum());
      !v)
    return v;
  const auto& first = c.messages.front();
  for (const auto& m : c.messages)
  {
    if (!same_checkpoint(first, m))
      return Verdict::fail(Reason::DigestMismatch, "checkpoint messages disagree");
    if (auto v = checkpoint(m); !v)
      return v;
  }
  return Verdict::ok();
}

Verdict Validator::attestation(View view,
                               const std::optional<CounterAttestation>& a) const
{
  if (!params().uses_tmc())
  {
    if (a)
      return Verdict::fail(Reason::BadAttestation, "variant has no trusted counter");
    return Verdict::ok();
  }
  if (!a)
    return Verdict::fail(Reason::BadAttestation, "missing counter attestation");
  const auto& identity = genesis_->tmc_keys[params().primary(view)];
  if (!identity || !tmc::verify_attestation(*identity, *a))
    return Verdict::fail(Reason::BadAttestation);
  return Verdict::ok();
}

Verdict Validator::view_certificate(const ViewCertificate& c) const
{
  if (c.view == 0)
  {
    const auto& g = genesis_->view0;
    if (c.attestation != g.attestation || c.start_digest != g.start_digest ||
        c.start_length != g.start_length || !c.confirms.empty())
      return Verdict::fail(Reason::DigestMismatch, "view 0 must match genesis");
    return Verdict::ok();
  }
  if (auto v = attestation(c.view, c.attestation); !v)
    return v;
  if (auto v = distinct_signers(c.confirms, [](const auto& m) { return m.replica; },
                                params().quorum());
      !v)
    return v;
  auto digest = new_view_summary_digest(c);
  for (const auto& m : c.confirms)
  {
    if (m.view != c.view)
      return Verdict::fail(Reason::WrongView, "confirm for another view");
    if (m.new_view_digest != digest)
      return Verdict::fail(Reason::DigestMismatch, "confirm digest");
    if (auto v = view_confirm(m); !v)
      return v;
  }
  return Verdict::ok();
}

Verdict Validator::view_change(const ViewChangeMsg& m, ChainSummary* summary) const
{
  const auto& p = params();
  if (!replica_in_range(m.replica))
    return Verdict::fail(Reason::Malformed, "unknown replica");
  if (!crypto::verify(genesis_->replica_keys[m.replica], signing_payload(m), m.signature))
    return Verdict::fail(Reason::BadSignature, "view-change");
  if (m.new_view == 0 || m.base.view >= m.new_view)
    return Verdict::fail(Reason::WrongView, "base view must precede new view");

  if (auto v = distinct_signers(m.evidence, [](const auto& r) { return r.replica; },
                                p.accuse_threshold());
      !v)
    return v;
  for (const auto& r : m.evidence)
  {
    if (r.view != m.new_view - 1)
      return Verdict::fail(Reason::WrongView, "evidence accuses another view");
    if (auto v = req_view_change(r); !v)
      return v;
  }

  if (auto v = view_certificate(m.base); !v)
    return v;
  if (auto v = checkpoint_certificate(m.checkpoint); !v)
    return v;
  auto cp = checkpoint_point(m.checkpoint);
  if (snapshot_digest(m.snapshot) != cp.state_digest)
    return Verdict::fail(Reason::DigestMismatch, "snapshot does not match checkpoint");
  if (cp.view > m.base.view)
    return Verdict::fail(Reason::WrongView, "checkpoint newer than base view");

  const auto& base = m.base;
  Counter next_counter = 1;
  if (cp.view == base.view)
  {
    if (cp.position < base.start_length)
      return Verdict::fail(Reason::Malformed, "checkpoint precedes its view");
    if (!m.checkpoint.is_genesis() &&
        m.checkpoint.messages.front().view_digest != new_view_summary_digest(base))
      return Verdict::fail(Reason::DigestMismatch, "checkpoint names another view");
    next_counter = cp.counter + 1;
  }
  else if (cp.position > base.start_length)
  {
    return Verdict::fail(Reason::Malformed, "checkpoint beyond start of base view");
  }

  auto ckey = counter_key(base);
  ChainSummary s;
  s.base_view = base.view;
  s.start_length = base.start_length;
  s.checkpoint_position = cp.position;
  s.digests.reserve(m.executed.size() + 1);
  s.digests.push_back(cp.history_digest);
  for (std::size_t i = 0; i < m.executed.size(); ++i)
  {
    const auto& e = m.executed[i];
    std::uint64_t pos = cp.position + i + 1;
    if (pos <= base.start_length)
    {
      if (e.view >= base.view)
        return Verdict::fail(Reason::WrongView, "entry before base view start");
    }
    else
    {
      if (e.view != base.view)
        return Verdict::fail(Reason::WrongView, "entry outside base view");
      if (e.cert.counter != next_counter)
        return Verdict::fail(Reason::Malformed, "counter values not consecutive");
      ++next_counter;
      if (auto v = order_request(e, ckey); !v)
        return v;
    }
    s.digests.push_back(history::extend(s.digests.back(), e));
  }
  if (base.start_length > s.end())
    return Verdict::fail(Reason::Malformed, "history ends before base view start");
  // A checkpoint inside the base view already vouches for its start.
  if (auto start = s.at(base.start_length); start && *start != base.start_digest)
    return Verdict::fail(Reason::DigestMismatch, "history does not reach base view start");

  if (!m.commit_certificate.empty())
  {
    if (!p.fallback)
      return Verdict::fail(Reason::Malformed, "commit certificate without a fallback path");
    if (auto v = commit_certificate(m.commit_certificate); !v)
      return v;
    const auto& d = m.commit_certificate.front().history_digest;
    auto it = std::find(s.digests.begin(), s.digests.end(), d);
    if (it == s.digests.end())
      return Verdict::fail(Reason::DigestMismatch, "commit certificate off the reported history");
    s.committed = cp.position + static_cast<std::uint64_t>(it - s.digests.begin());
  }

  if (summary)
    *summary = std::move(s);
  return Verdict::ok();
}

Verdict Validator::new_view(const NewViewMsg& m,
                            std::vector<ChainSummary>* summaries) const
{
  const auto& p = params();
  if (m.replica != p.primary(m.view))
    return Verdict::fail(Reason::WrongView, "sender is not the view's primary");
  if (!crypto::verify(genesis_->replica_keys[m.replica], signing_payload(m), m.signature))
    return Verdict::fail(Reason::BadSignature, "new-view");
  if (auto v = attestation(m.view, m.attestation); !v)
    return v;
  if (auto v = distinct_signers(m.view_changes, [](const auto& vc) { return vc.replica; },
                                p.quorum());
      !v)
    return v;
  std::vector<ChainSummary> out;
  for (const auto& vc : m.view_changes)
  {
    if (vc.new_view != m.view)
      return Verdict::fail(Reason::WrongView, "view-change for another view");
    ChainSummary s;
    if (auto v = view_change(vc, &s); !v)
      return v;
    out.push_back(std::move(s));
  }
  if (summaries)
    *summaries = std::move(out);
  return Verdict::ok();
}

Verdict Validator::commit(const CommitMsg& m) const
{
  if (!client_in_range(m.client))
    return Verdict::fail(Reason::Malformed, "unknown client");
  if (!crypto::verify(genesis_->client_keys[m.client], signing_payload(m), m.signature))
    return Verdict::fail(Reason::BadSignature, "commit");
  for (const auto& r : m.certificate)
    if (r.order.request.client != m.client || r.order.request.id != m.request_id)
      return Verdict::fail(Reason::Malformed, "reply for another request");
  return commit_certificate(m.certificate);
}

Verdict Validator::commit_certificate(const std::vector<ReplyMsg>& replies) const
{
  if (auto v = distinct_signers(replies, [](const auto& r) { return r.replica; },
                                params().commit_threshold());
      !v)
    return v;
  auto key = reply_match_key(replies.front());
  for (const auto& r : replies)
  {
    if (reply_match_key(r) != key)
      return Verdict::fail(Reason::DigestMismatch, "replies do not match");
    if (auto v = reply(r); !v)
      return v;
  }
  return Verdict::ok();
}

Verdict Validator::misbehavior_proof(const MisbehaviorProofMsg& m,
                                     const ViewCertificate& cert) const
{
  auto ckey = counter_key(cert);
  const auto& o = m.order;
  if (o.view != cert.view)
    return Verdict::fail(Reason::WrongView, "proof about another view");
  if (auto v = order_request(o, ckey); !v)
    return v;
  if (!m.previous)
  {
    if (o.cert.counter == 1 && o.history != history::extend(cert.start_digest, o))
      return Verdict::ok();
    return Verdict::fail(Reason::Malformed, "first slot chains from the view start");
  }
  const auto& p = *m.previous;
  if (p.view != cert.view)
    return Verdict::fail(Reason::WrongView, "proof about another view");
  if (auto v = order_request(p, ckey); !v)
    return v;
  if (p.cert.counter == o.cert.counter && order_digest(p) != order_digest(o))
    return Verdict::ok();
  if (p.cert.counter + 1 == o.cert.counter && o.history != history::extend(p.history, o))
    return Verdict::ok();
  return Verdict::fail(Reason::Malformed, "order-requests are consistent");
}

Verdict Validator::local_commit(const LocalCommitMsg& m) const
{
  if (!replica_in_range(m.replica))
    return Verdict::fail(Reason::Malformed, "unknown replica");
  if (!crypto::verify(genesis_->replica_keys[m.replica], signing_payload(m), m.signature))
    return Verdict::fail(Reason::BadSignature, "local-commit");
  return Verdict::ok();
}

Verdict Validator::validate(const Message& m, const ViewContext& ctx) const
{
  struct Visitor
  {
    const Validator& v;
    const ViewContext& ctx;

    Verdict operator()(const RequestMsg& x) const { return v.request(x); }
    Verdict operator()(const OrderRequestMsg& x) const
    {
      if (x.view != ctx.view)
        return Verdict::fail(Reason::WrongView);
      return v.order_request(x, ctx.counter_key);
    }
    Verdict operator()(const ReplyMsg& x) const { return v.reply(x); }
    Verdict operator()(const FillHoleMsg& x) const
    {
      if (x.index < 1)
        return Verdict::fail(Reason::Malformed, "fill-hole index must be positive");
      return Verdict::ok();
    }
    Verdict operator()(const ReqViewChangeMsg& x) const { return v.req_view_change(x); }
    Verdict operator()(const ViewChangeMsg& x) const { return v.view_change(x); }
    Verdict operator()(const NewViewMsg& x) const
    {
      if (x.view < ctx.view)
        return Verdict::fail(Reason::WrongView, "stale new-view");
      return v.new_view(x);
    }
    Verdict operator()(const ViewConfirmMsg& x) const { return v.view_confirm(x); }
    Verdict operator()(const CheckpointMsg& x) const { return v.checkpoint(x); }
    Verdict operator()(const CommitMsg& x) const { return v.commit(x); }
    Verdict operator()(const LocalCommitMsg& x) const { return v.local_commit(x); }
    Verdict operator()(const MisbehaviorProofMsg& x) const
    {
      if (x.previous)
        if (auto r = v.order_request(*x.previous, ctx.counter_key); !r)
          return r;
      return v.order_request(x.order, ctx.counter_key);
    }
    Verdict operator()(const NewViewRequestMsg&) const { return Verdict::ok(); }
    Verdict operator()(const StateRequestMsg&) const { return Verdict::ok(); }
    Verdict operator()(const StateTransferMsg& x) const
    {
      if (auto r = v.checkpoint_certificate(x.checkpoint); !r)
        return r;
      if (snapshot_digest(x.snapshot) != checkpoint_point(x.checkpoint).state_digest)
        return Verdict::fail(Reason::DigestMismatch, "snapshot");
      return Verdict::ok();
    }
  };
  return std::visit(Visitor{*this, ctx}, m);
}

namespace {

struct SignatureAudit
{
  const Genesis& g;
  const std::set<crypto::PublicKey>& counter_keys;

  bool replica_sig(ReplicaId r, const Bytes& payload, const Signature& s) const
  {
    return r < g.replica_keys.size() && crypto::verify(g.replica_keys[r], payload, s);
  }

  bool client_sig(ClientId c, const Bytes& payload, const Signature& s) const
  {
    return c < g.client_keys.size() && crypto::verify(g.client_keys[c], payload, s);
  }

  bool attestation(View v, const std::optional<CounterAttestation>& a) const
  {
    if (!a)
      return true;
    const auto& p = g.params;
    const auto& id = g.tmc_keys.at(p.primary(v));
    return id && tmc::verify_attestation(*id, *a);
  }

  bool operator()(const RequestMsg& m) const
  {
    return client_sig(m.client, signing_payload(m), m.signature);
  }

  bool operator()(const OrderRequestMsg& m) const
  {
    if (!replica_sig(g.params.primary(m.view), signing_payload(m), m.signature))
      return false;
    bool cert_ok = std::any_of(counter_keys.begin(), counter_keys.end(), [&](const auto& k) {
      return tmc::verify_certificate(k, m.cert);
    });
    return cert_ok && (*this)(m.request);
  }

  bool operator()(const ReplyMsg& m) const
  {
    return replica_sig(m.replica, signing_payload(m), m.signature) && (*this)(m.order);
  }

  bool operator()(const FillHoleMsg&) const { return true; }

  bool operator()(const ReqViewChangeMsg& m) const
  {
    return replica_sig(m.replica, signing_payload(m), m.signature);
  }

  bool operator()(const ViewConfirmMsg& m) const
  {
    return replica_sig(m.replica, signing_payload(m), m.signature);
  }

  bool operator()(const CheckpointMsg& m) const
  {
    return replica_sig(m.replica, signing_payload(m), m.signature);
  }

  bool certificate(const ViewCertificate& c) const
  {
    if (!attestation(c.view, c.attestation))
      return false;
    return std::all_of(c.confirms.begin(), c.confirms.end(),
                       [&](const auto& x) { return (*this)(x); });
  }

  bool snapshot(const AppSnapshot& s) const
  {
    return std::all_of(s.clients.begin(), s.clients.end(),
                       [&](const auto& kv) { return (*this)(kv.second.order); });
  }

  bool checkpoints(const CheckpointCertificate& c) const
  {
    return std::all_of(c.messages.begin(), c.messages.end(),
                       [&](const auto& x) { return (*this)(x); });
  }

  bool operator()(const ViewChangeMsg& m) const
  {
    if (!replica_sig(m.replica, signing_payload(m), m.signature))
      return false;
    if (!certificate(m.base) || !checkpoints(m.checkpoint) || !snapshot(m.snapshot))
      return false;
    for (const auto& e : m.executed)
      if (!(*this)(e))
        return false;
    for (const auto& r : m.evidence)
      if (!(*this)(r))
        return false;
    for (const auto& r : m.commit_certificate)
      if (!(*this)(r))
        return false;
    return true;
  }

  bool operator()(const NewViewMsg& m) const
  {
    if (!replica_sig(m.replica, signing_payload(m), m.signature))
      return false;
    if (!attestation(m.view, m.attestation))
      return false;
    return std::all_of(m.view_changes.begin(), m.view_changes.end(),
                       [&](const auto& x) { return (*this)(x); });
  }

  bool operator()(const CommitMsg& m) const
  {
    if (!client_sig(m.client, signing_payload(m), m.signature))
      return false;
    return std::all_of(m.certificate.begin(), m.certificate.end(),
                       [&](const auto& x) { return (*this)(x); });
  }

  bool operator()(const LocalCommitMsg& m) const
  {
    return replica_sig(m.replica, signing_payload(m), m.signature);
  }

  bool operator()(const MisbehaviorProofMsg& m) const
  {
    return (!m.previous || (*this)(*m.previous)) && (*this)(m.order);
  }

  bool operator()(const NewViewRequestMsg&) const { return true; }
  bool operator()(const StateRequestMsg&) const { return true; }

  bool operator()(const StateTransferMsg& m) const
  {
    return checkpoints(m.checkpoint) && snapshot(m.snapshot);
  }
};

} // namespace

bool Validator::signatures_valid(const Message& m,
                                 const std::set<crypto::PublicKey>& counter_keys) const
{
  return std::visit(SignatureAudit{*genesis_, counter_keys}, m);
}

} // namespace sacz
