// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "sacz/messages.hpp"

namespace sacz::msg {

namespace {

enum class Tag : std::uint8_t
{
  Request = 1,
  OrderRequest,
  Reply,
  FillHole,
  ReqViewChange,
  ViewChange,
  NewView,
  ViewConfirm,
  Checkpoint,
  Commit,
  LocalCommit,
  NewViewRequest,
  StateRequest,
  StateTransfer,
  MisbehaviorProof,
};

template <typename T, typename F>
void encode_seq(Writer& w, const std::vector<T>& v, F&& each)
{
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (const auto& x : v)
    each(w, x);
}

template <typename T, typename F>
std::vector<T> decode_seq(Reader& r, F&& each)
{
  auto n = r.count();
  std::vector<T> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i)
    out.push_back(each(r));
  return out;
}

void encode_cert(Writer& w, const OrderingCertificate& c)
{
  w.u64(c.counter);
  w.digest(c.message_digest);
  w.signature(c.signature);
}

OrderingCertificate decode_cert(Reader& r)
{
  OrderingCertificate c;
  c.counter = r.u64();
  c.message_digest = r.digest();
  c.signature = r.signature();
  return c;
}

void encode_attestation(Writer& w, const std::optional<CounterAttestation>& a)
{
  w.boolean(a.has_value());
  if (a)
  {
    w.public_key(a->instance_key);
    w.signature(a->signature);
  }
}

std::optional<CounterAttestation> decode_attestation(Reader& r)
{
  if (!r.boolean())
    return std::nullopt;
  CounterAttestation a;
  a.instance_key = r.public_key();
  a.signature = r.signature();
  return a;
}

// ---- bodies (everything except the signature) ----

void body(Writer& w, const RequestMsg& m)
{
  w.bytes(m.op);
  w.u32(m.client);
  w.u64(m.id);
}

void body(Writer& w, const OrderRequestMsg& m)
{
  w.u64(m.view);
  encode_cert(w, m.cert);
  encode(w, m.request);
  w.digest(m.history);
}

void body(Writer& w, const ReplyMsg& m)
{
  encode(w, m.order);
  w.bytes(m.response);
  w.digest(m.history_digest);
  w.u32(m.replica);
}

void body(Writer& w, const ReqViewChangeMsg& m)
{
  w.u64(m.view);
  w.u32(m.replica);
}

void body(Writer& w, const ViewConfirmMsg& m)
{
  w.u64(m.view);
  w.u32(m.replica);
  w.digest(m.new_view_digest);
}

void body(Writer& w, const CheckpointMsg& m)
{
  w.u64(m.view);
  w.u64(m.counter);
  w.u64(m.position);
  w.digest(m.history_digest);
  w.digest(m.state_digest);
  w.digest(m.view_digest);
  w.u32(m.replica);
}

void encode_rvc(Writer& w, const ReqViewChangeMsg& m)
{
  body(w, m);
  w.signature(m.signature);
}

void encode_confirm(Writer& w, const ViewConfirmMsg& m)
{
  body(w, m);
  w.signature(m.signature);
}

void encode_checkpoint_cert(Writer& w, const CheckpointCertificate& c)
{
  encode_seq(w, c.messages, [](Writer& w, const CheckpointMsg& m) { encode(w, m); });
}

void body(Writer& w, const ViewChangeMsg& m)
{
  w.u64(m.new_view);
  w.u32(m.replica);
  encode(w, m.base);
  encode_checkpoint_cert(w, m.checkpoint);
  encode(w, m.snapshot);
  encode_seq(w, m.executed, [](Writer& w, const OrderRequestMsg& o) { encode(w, o); });
  encode_seq(w, m.evidence, encode_rvc);
  encode_seq(w, m.commit_certificate, [](Writer& w, const ReplyMsg& x) { encode(w, x); });
}

void encode_view_change(Writer& w, const ViewChangeMsg& m)
{
  body(w, m);
  w.signature(m.signature);
}

void body(Writer& w, const NewViewMsg& m)
{
  w.u64(m.view);
  encode_attestation(w, m.attestation);
  encode_seq(w, m.view_changes, encode_view_change);
  w.u32(m.replica);
}

void body(Writer& w, const CommitMsg& m)
{
  w.u32(m.client);
  w.u64(m.request_id);
  encode_seq(w, m.certificate, [](Writer& w, const ReplyMsg& r) { encode(w, r); });
}

void body(Writer& w, const LocalCommitMsg& m)
{
  w.u64(m.view);
  w.u32(m.client);
  w.u64(m.request_id);
  w.digest(m.history_digest);
  w.u32(m.replica);
}

template <typename M>
Bytes payload(std::string_view domain, const M& m)
{
  Writer w;
  w.str(domain);
  body(w, m);
  return std::move(w).take();
}

// ---- decoders ----

RequestMsg decode_request(Reader& r)
{
  RequestMsg m;
  m.op = r.bytes();
  m.client = r.u32();
  m.id = r.u64();
  m.signature = r.signature();
  return m;
}

OrderRequestMsg decode_order(Reader& r)
{
  OrderRequestMsg m;
  m.view = r.u64();
  m.cert = decode_cert(r);
  m.request = decode_request(r);
  m.history = r.digest();
  m.signature = r.signature();
  return m;
}

ReplyMsg decode_reply(Reader& r)
{
  ReplyMsg m;
  m.order = decode_order(r);
  m.response = r.bytes();
  m.history_digest = r.digest();
  m.replica = r.u32();
  m.signature = r.signature();
  return m;
}

ReqViewChangeMsg decode_rvc(Reader& r)
{
  ReqViewChangeMsg m;
  m.view = r.u64();
  m.replica = r.u32();
  m.signature = r.signature();
  return m;
}

ViewConfirmMsg decode_confirm(Reader& r)
{
  ViewConfirmMsg m;
  m.view = r.u64();
  m.replica = r.u32();
  m.new_view_digest = r.digest();
  m.signature = r.signature();
  return m;
}

ViewCertificate decode_view_cert(Reader& r)
{
  ViewCertificate c;
  c.view = r.u64();
  c.attestation = decode_attestation(r);
  c.start_digest = r.digest();
  c.start_length = r.u64();
  c.confirms = decode_seq<ViewConfirmMsg>(r, decode_confirm);
  return c;
}

CheckpointMsg decode_checkpoint(Reader& r)
{
  CheckpointMsg m;
  m.view = r.u64();
  m.counter = r.u64();
  m.position = r.u64();
  m.history_digest = r.digest();
  m.state_digest = r.digest();
  m.view_digest = r.digest();
  m.replica = r.u32();
  m.signature = r.signature();
  return m;
}

CheckpointCertificate decode_checkpoint_cert(Reader& r)
{
  return {decode_seq<CheckpointMsg>(r, decode_checkpoint)};
}

AppSnapshot decode_snapshot(Reader& r)
{
  AppSnapshot s;
  auto nkv = r.count();
  for (std::uint32_t i = 0; i < nkv; ++i)
  {
    auto k = r.str();
    auto v = r.str();
    s.kv.emplace(std::move(k), std::move(v));
  }
  auto nc = r.count();
  for (std::uint32_t i = 0; i < nc; ++i)
  {
    ClientId c = r.u32();
    ClientRecord rec;
    rec.id = r.u64();
    rec.response = r.bytes();
    rec.order = decode_order(r);
    rec.history_digest = r.digest();
    s.clients.emplace(c, std::move(rec));
  }
  return s;
}

ViewChangeMsg decode_view_change(Reader& r)
{
  ViewChangeMsg m;
  m.new_view = r.u64();
  m.replica = r.u32();
  m.base = decode_view_cert(r);
  m.checkpoint = decode_checkpoint_cert(r);
  m.snapshot = decode_snapshot(r);
  m.executed = decode_seq<OrderRequestMsg>(r, decode_order);
  m.evidence = decode_seq<ReqViewChangeMsg>(r, decode_rvc);
  m.commit_certificate = decode_seq<ReplyMsg>(r, decode_reply);
  m.signature = r.signature();
  return m;
}

NewViewMsg decode_new_view(Reader& r)
{
  NewViewMsg m;
  m.view = r.u64();
  m.attestation = decode_attestation(r);
  m.view_changes = decode_seq<ViewChangeMsg>(r, decode_view_change);
  m.replica = r.u32();
  m.signature = r.signature();
  return m;
}

CommitMsg decode_commit(Reader& r)
{
  CommitMsg m;
  m.client = r.u32();
  m.request_id = r.u64();
  m.certificate = decode_seq<ReplyMsg>(r, decode_reply);
  m.signature = r.signature();
  return m;
}

LocalCommitMsg decode_local_commit(Reader& r)
{
  LocalCommitMsg m;
  m.view = r.u64();
  m.client = r.u32();
  m.request_id = r.u64();
  m.history_digest = r.digest();
  m.replica = r.u32();
  m.signature = r.signature();
  return m;
}

struct EncodeVisitor
{
  Writer& w;

  void operator()(const RequestMsg& m) { w.u8(std::uint8_t(Tag::Request)); encode(w, m); }
  void operator()(const OrderRequestMsg& m) { w.u8(std::uint8_t(Tag::OrderRequest)); encode(w, m); }
  void operator()(const ReplyMsg& m) { w.u8(std::uint8_t(Tag::Reply)); encode(w, m); }
  void operator()(const FillHoleMsg& m)
  {
    w.u8(std::uint8_t(Tag::FillHole));
    w.u64(m.view);
    w.u64(m.index);
    w.u32(m.replica);
  }
  void operator()(const ReqViewChangeMsg& m) { w.u8(std::uint8_t(Tag::ReqViewChange)); encode_rvc(w, m); }
  void operator()(const ViewChangeMsg& m) { w.u8(std::uint8_t(Tag::ViewChange)); encode_view_change(w, m); }
  void operator()(const NewViewMsg& m)
  {
    w.u8(std::uint8_t(Tag::NewView));
    body(w, m);
    w.signature(m.signature);
  }
  void operator()(const ViewConfirmMsg& m) { w.u8(std::uint8_t(Tag::ViewConfirm)); encode_confirm(w, m); }
  void operator()(const CheckpointMsg& m) { w.u8(std::uint8_t(Tag::Checkpoint)); encode(w, m); }
  void operator()(const CommitMsg& m)
  {
    w.u8(std::uint8_t(Tag::Commit));
    body(w, m);
    w.signature(m.signature);
  }
  void operator()(const LocalCommitMsg& m)
  {
    w.u8(std::uint8_t(Tag::LocalCommit));
    body(w, m);
    w.signature(m.signature);
  }
  void operator()(const NewViewRequestMsg& m)
  {
    w.u8(std::uint8_t(Tag::NewViewRequest));
    w.u64(m.view);
    w.digest(m.new_view_digest);
    w.u32(m.replica);
  }
  void operator()(const StateRequestMsg& m)
  {
    w.u8(std::uint8_t(Tag::StateRequest));
    w.u64(m.view);
    w.u64(m.position);
    w.u32(m.replica);
  }
  void operator()(const StateTransferMsg& m)
  {
    w.u8(std::uint8_t(Tag::StateTransfer));
    encode_checkpoint_cert(w, m.checkpoint);
    encode(w, m.snapshot);
    w.u32(m.replica);
  }
  void operator()(const MisbehaviorProofMsg& m)
  {
    w.u8(std::uint8_t(Tag::MisbehaviorProof));
    w.boolean(m.previous.has_value());
    if (m.previous)
      encode(w, *m.previous);
    encode(w, m.order);
    w.u32(m.replica);
  }
};

} // namespace

void encode(Writer& w, const RequestMsg& m)
{
  body(w, m);
  w.signature(m.signature);
}

void encode(Writer& w, const OrderRequestMsg& m)
{
  body(w, m);
  w.signature(m.signature);
}

void encode(Writer& w, const ReplyMsg& m)
{
  body(w, m);
  w.signature(m.signature);
}

void encode(Writer& w, const ViewCertificate& c)
{
  w.u64(c.view);
  encode_attestation(w, c.attestation);
  w.digest(c.start_digest);
  w.u64(c.start_length);
  encode_seq(w, c.confirms, encode_confirm);
}

void encode(Writer& w, const CheckpointMsg& m)
{
  body(w, m);
  w.signature(m.signature);
}

void encode(Writer& w, const AppSnapshot& s)
{
  w.u32(static_cast<std::uint32_t>(s.kv.size()));
  for (const auto& [k, v] : s.kv)
  {
    w.str(k);
    w.str(v);
  }
  w.u32(static_cast<std::uint32_t>(s.clients.size()));
  for (const auto& [c, rec] : s.clients)
  {
    w.u32(c);
    w.u64(rec.id);
    w.bytes(rec.response);
    encode(w, rec.order);
    w.digest(rec.history_digest);
  }
}

std::string_view kind_name(const Message& m)
{
  static constexpr std::string_view names[] = {
    "REQUEST",     "ORDER-REQUEST", "REPLY",        "FILL-HOLE",
    "REQ-VIEW-CHANGE", "VIEW-CHANGE", "NEW-VIEW",   "VIEW-CONFIRM",
    "CHECKPOINT",  "COMMIT",        "LOCAL-COMMIT", "NEW-VIEW-REQUEST",
    "STATE-REQUEST", "STATE-TRANSFER", "PROOF-OF-MISBEHAVIOR"};
  return names[m.index()];
}

Bytes encode(const Message& m)
{
  Writer w;
  std::visit(EncodeVisitor{w}, m);
  return std::move(w).take();
}

Message decode(ByteView bytes)
{
  Reader r(bytes);
  auto tag = static_cast<Tag>(r.u8());
  Message out;
  switch (tag)
  {
    case Tag::Request: out = decode_request(r); break;
    case Tag::OrderRequest: out = decode_order(r); break;
    case Tag::Reply: out = decode_reply(r); break;
    case Tag::FillHole:
    {
      FillHoleMsg m;
      m.view = r.u64();
      m.index = r.u64();
      m.replica = r.u32();
      out = m;
      break;
    }
    case Tag::ReqViewChange: out = decode_rvc(r); break;
    case Tag::ViewChange: out = decode_view_change(r); break;
    case Tag::NewView: out = decode_new_view(r); break;
    case Tag::ViewConfirm: out = decode_confirm(r); break;
    case Tag::Checkpoint: out = decode_checkpoint(r); break;
    case Tag::Commit: out = decode_commit(r); break;
    case Tag::LocalCommit: out = decode_local_commit(r); break;
    case Tag::NewViewRequest:
    {
      NewViewRequestMsg m;
      m.view = r.u64();
      m.new_view_digest = r.digest();
      m.replica = r.u32();
      out = m;
      break;
    }
    case Tag::StateRequest:
    {
      StateRequestMsg m;
      m.view = r.u64();
      m.position = r.u64();
      m.replica = r.u32();
      out = m;
      break;
    }
    case Tag::StateTransfer:
    {
      StateTransferMsg m;
      m.checkpoint = decode_checkpoint_cert(r);
      m.snapshot = decode_snapshot(r);
      m.replica = r.u32();
      out = m;
      break;
    }
    case Tag::MisbehaviorProof:
    {
      MisbehaviorProofMsg m;
      if (r.boolean())
        m.previous = decode_order(r);
      m.order = decode_order(r);
      m.replica = r.u32();
      out = m;
      break;
    }
    default:
      throw DecodeError("unknown message tag");
  }
  if (!r.done())
    throw DecodeError("trailing bytes after message");
  return out;
}

Bytes signing_payload(const RequestMsg& m) { return payload("REQUEST", m); }
Bytes signing_payload(const OrderRequestMsg& m) { return payload("ORDER-REQUEST", m); }
Bytes signing_payload(const ReplyMsg& m) { return payload("REPLY", m); }
Bytes signing_payload(const ReqViewChangeMsg& m) { return payload("REQ-VIEW-CHANGE", m); }
Bytes signing_payload(const ViewConfirmMsg& m) { return payload("VIEW-CONFIRM", m); }
Bytes signing_payload(const CheckpointMsg& m) { return payload("CHECKPOINT", m); }
Bytes signing_payload(const ViewChangeMsg& m) { return payload("VIEW-CHANGE", m); }
Bytes signing_payload(const NewViewMsg& m) { return payload("NEW-VIEW", m); }
Bytes signing_payload(const CommitMsg& m) { return payload("COMMIT", m); }
Bytes signing_payload(const LocalCommitMsg& m) { return payload("LOCAL-COMMIT", m); }

Digest request_digest(const RequestMsg& m)
{
  Writer w;
  encode(w, m);
  return crypto::hash(w.data());
}

Digest order_digest(const OrderRequestMsg& m)
{
  Writer w;
  encode(w, m);
  return crypto::hash(w.data());
}

Digest snapshot_digest(const AppSnapshot& s)
{
  Writer w;
  w.str("APP-STATE");
  encode(w, s);
  return crypto::hash(w.data());
}

Digest view_change_digest(const ViewChangeMsg& m)
{
  Writer w;
  encode_view_change(w, m);
  return crypto::hash(w.data());
}

Digest new_view_summary_digest(View view,
                               const std::optional<CounterAttestation>& attestation,
                               const Digest& start_digest,
                               std::uint64_t start_length)
{
  Writer w;
  w.str("NEW-VIEW-STATE");
  w.u64(view);
  encode_attestation(w, attestation);
  w.digest(start_digest);
  w.u64(start_length);
  return crypto::hash(w.data());
}

Digest reply_match_key(const ReplyMsg& m)
{
  Writer w;
  w.u64(m.order.view);
  encode(w, m.order);
  w.bytes(m.response);
  w.digest(m.history_digest);
  return crypto::hash(w.data());
}

namespace {

struct AttributionVisitor
{
  std::optional<RequestKey> operator()(const RequestMsg& x) const { return x.key(); }
  std::optional<RequestKey> operator()(const OrderRequestMsg& x) const
  {
    return x.request.key();
  }
  std::optional<RequestKey> operator()(const ReplyMsg& x) const
  {
    return x.order.request.key();
  }
  std::optional<RequestKey> operator()(const CommitMsg& x) const
  {
    return RequestKey{x.client, x.request_id};
  }
  std::optional<RequestKey> operator()(const LocalCommitMsg& x) const
  {
    return RequestKey{x.client, x.request_id};
  }
  std::optional<RequestKey> operator()(const auto&) const { return std::nullopt; }
};

} // namespace

std::optional<RequestKey> attributed_request(const Message& m)
{
  return std::visit(AttributionVisitor{}, m);
}

} // namespace sacz::msg
