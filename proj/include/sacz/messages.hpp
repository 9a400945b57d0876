// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include "sacz/crypto.hpp"
#include "sacz/encoding.hpp"
#include "sacz/tmc.hpp"
#include "sacz/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sacz::msg {

using crypto::Digest;
using crypto::PublicKey;
using crypto::Signature;
using tmc::CounterAttestation;
using tmc::OrderingCertificate;

struct RequestMsg
{
  Bytes op;
  ClientId client = 0;
  std::uint64_t id = 0;
  Signature signature;

  bool operator==(const RequestMsg&) const = default;
  RequestKey key() const { return {client, id}; }
};

struct OrderRequestMsg
{
  View view = 0;
  OrderingCertificate cert;
  RequestMsg request;
  Digest history;      // history digest the primary claims after this entry
  Signature signature; // primary of `view`

  bool operator==(const OrderRequestMsg&) const = default;
};

struct ReplyMsg
{
  OrderRequestMsg order;
  Bytes response;
  Digest history_digest;
  ReplicaId replica = 0;
  Signature signature;

  bool operator==(const ReplyMsg&) const = default;
};

struct FillHoleMsg
{
  View view = 0;
  Counter index = 0;
  ReplicaId replica = 0;

  bool operator==(const FillHoleMsg&) const = default;
};

struct ReqViewChangeMsg
{
  View view = 0; // the view being accused
  ReplicaId replica = 0;
  Signature signature;

  bool operator==(const ReqViewChangeMsg&) const = default;
};

struct ViewConfirmMsg
{
  View view = 0;
  ReplicaId replica = 0;
  Digest new_view_digest;
  Signature signature;

  bool operator==(const ViewConfirmMsg&) const = default;
};

/// Matching confirms for one view, plus the summary they vouch for. View 0 is
/// certified by the genesis configuration and carries no confirms.
struct ViewCertificate
{
  View view = 0;
  std::optional<CounterAttestation> attestation; // absent for baseline variants
  Digest start_digest;                            // history digest when the view began
  std::uint64_t start_length = 0;
  std::vector<ViewConfirmMsg> confirms;

  bool operator==(const ViewCertificate&) const = default;
};

struct CheckpointMsg
{
  View view = 0;
  Counter counter = 0;        // last executed request number within `view`
  std::uint64_t position = 0; // total history length
  Digest history_digest;
  Digest state_digest;
  Digest view_digest; // confirmed digest of the view certificate for `view`
  ReplicaId replica = 0;
  Signature signature;

  bool operator==(const CheckpointMsg&) const = default;
};

/// 2f+1 matching checkpoint messages. Empty means the genesis checkpoint.
struct CheckpointCertificate
{
  std::vector<CheckpointMsg> messages;

  bool operator==(const CheckpointCertificate&) const = default;
  bool is_genesis() const { return messages.empty(); }
};

/// Per-client replay cache entry; part of the replicated state.
struct ClientRecord
{
  std::uint64_t id = 0;
  Bytes response;
  OrderRequestMsg order;
  Digest history_digest;

  bool operator==(const ClientRecord&) const = default;
};

/// Application state (key-value store plus client table) at some history
/// position.
struct AppSnapshot
{
  std::map<std::string, std::string> kv;
  std::map<ClientId, ClientRecord> clients;

  bool operator==(const AppSnapshot&) const = default;
};

struct ViewChangeMsg
{
  View new_view = 0;
  ReplicaId replica = 0;
  ViewCertificate base;
  CheckpointCertificate checkpoint;
  AppSnapshot snapshot;                  // state at the checkpoint
  std::vector<OrderRequestMsg> executed; // every history entry after the checkpoint
  std::vector<ReqViewChangeMsg> evidence;
  // Baselines: the highest commit certificate this replica acted on, if it
  // lies at or after the checkpoint. Always empty for the counter variant.
  std::vector<ReplyMsg> commit_certificate;
  Signature signature;

  bool operator==(const ViewChangeMsg&) const = default;
};

struct NewViewMsg
{
  View view = 0;
  std::optional<CounterAttestation> attestation;
  std::vector<ViewChangeMsg> view_changes;
  ReplicaId replica = 0;
  Signature signature;

  bool operator==(const NewViewMsg&) const = default;
};

/// Zyzzyva fallback: the client's commit certificate.
struct CommitMsg
{
  ClientId client = 0;
  std::uint64_t request_id = 0;
  std::vector<ReplyMsg> certificate;
  Signature signature;

  bool operator==(const CommitMsg&) const = default;
};

struct LocalCommitMsg
{
  View view = 0;
  ClientId client = 0;
  std::uint64_t request_id = 0;
  Digest history_digest;
  ReplicaId replica = 0;
  Signature signature;

  bool operator==(const LocalCommitMsg&) const = default;
};

/// Two order-requests one primary signed that no correct primary would: the
/// same slot with different content, or consecutive slots whose claimed
/// histories do not chain. `previous` is absent when `order` opens its view.
struct MisbehaviorProofMsg
{
  std::optional<OrderRequestMsg> previous;
  OrderRequestMsg order;
  ReplicaId replica = 0;

  bool operator==(const MisbehaviorProofMsg&) const = default;
};

/// Asks a confirmer for the new-view message behind a confirm quorum.
struct NewViewRequestMsg
{
  View view = 0;
  Digest new_view_digest;
  ReplicaId replica = 0;

  bool operator==(const NewViewRequestMsg&) const = default;
};

struct StateRequestMsg
{
  View view = 0;
  std::uint64_t position = 0;
  ReplicaId replica = 0;

  bool operator==(const StateRequestMsg&) const = default;
};

struct StateTransferMsg
{
  CheckpointCertificate checkpoint;
  AppSnapshot snapshot;
  ReplicaId replica = 0;

  bool operator==(const StateTransferMsg&) const = default;
};

using Message = std::variant<RequestMsg, OrderRequestMsg, ReplyMsg, FillHoleMsg,
                             ReqViewChangeMsg, ViewChangeMsg, NewViewMsg,
                             ViewConfirmMsg, CheckpointMsg, CommitMsg,
                             LocalCommitMsg, NewViewRequestMsg, StateRequestMsg,
                             StateTransferMsg, MisbehaviorProofMsg>;

std::string_view kind_name(const Message& m);

// Canonical encoding of every message kind.
Bytes encode(const Message& m);
Message decode(ByteView bytes);

void encode(Writer& w, const RequestMsg& m);
void encode(Writer& w, const OrderRequestMsg& m);
void encode(Writer& w, const ReplyMsg& m);
void encode(Writer& w, const ViewCertificate& m);
void encode(Writer& w, const CheckpointMsg& m);
void encode(Writer& w, const AppSnapshot& m);

// Bytes covered by each signature (domain-separated, signature field excluded).
Bytes signing_payload(const RequestMsg& m);
Bytes signing_payload(const OrderRequestMsg& m);
Bytes signing_payload(const ReplyMsg& m);
Bytes signing_payload(const ReqViewChangeMsg& m);
Bytes signing_payload(const ViewConfirmMsg& m);
Bytes signing_payload(const CheckpointMsg& m);
Bytes signing_payload(const ViewChangeMsg& m);
Bytes signing_payload(const NewViewMsg& m);
Bytes signing_payload(const CommitMsg& m);
Bytes signing_payload(const LocalCommitMsg& m);

template <typename M>
void sign(M& m, const crypto::KeyPair& key)
{
  m.signature = key.sign(signing_payload(m));
}

/// H(m_request): what the ordering certificate binds.
Digest request_digest(const RequestMsg& m);
Digest order_digest(const OrderRequestMsg& m);
Digest snapshot_digest(const AppSnapshot& s);
Digest view_change_digest(const ViewChangeMsg& m);

/// Digest a replica confirms for a new view: the view, its counter key and the
/// starting history it determines.
Digest new_view_summary_digest(View view,
                               const std::optional<CounterAttestation>& attestation,
                               const Digest& start_digest,
                               std::uint64_t start_length);

inline Digest new_view_summary_digest(const ViewCertificate& c)
{
  return new_view_summary_digest(c.view, c.attestation, c.start_digest,
                                 c.start_length);
}

/// Key clients use to decide whether replies match: view, order-request,
/// response and history digest all equal.
Digest reply_match_key(const ReplyMsg& m);

/// The request a message is about, when it is about exactly one.
std::optional<RequestKey> attributed_request(const Message& m);

} // namespace sacz::msg
