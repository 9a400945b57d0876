// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include "sacz/config.hpp"
#include "sacz/messages.hpp"

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace sacz {

enum class Reason
{
  Ok,
  BadSignature,
  WrongView,
  InsufficientQuorum,
  DuplicateSigner,
  BadAttestation,
  DigestMismatch,
  Malformed,
};

std::string_view reason_name(Reason r);

struct Verdict
{
  Reason reason = Reason::Ok;
  std::string detail;

  static Verdict ok() { return {}; }
  static Verdict fail(Reason r, std::string detail = {}) { return {r, std::move(detail)}; }
  explicit operator bool() const { return reason == Reason::Ok; }
};

/// What a view-change message proves about its sender's history: the stable
/// checkpoint it starts from and the chain digest at every later position.
struct ChainSummary
{
  View base_view = 0;
  std::uint64_t start_length = 0; // where base_view began
  std::uint64_t checkpoint_position = 0;
  std::vector<crypto::Digest> digests; // digests[i] is the digest at checkpoint_position + i
  std::optional<std::uint64_t> committed; // position a carried commit certificate vouches for

  std::uint64_t end() const { return checkpoint_position + digests.size() - 1; }

  /// Digest at `position`, if this summary covers it.
  std::optional<crypto::Digest> at(std::uint64_t position) const
  {
    if (position < checkpoint_position || position > end())
      return std::nullopt;
    return digests[position - checkpoint_position];
  }
};

/// Where a replica is when it validates: the installed view and the key that
/// orders requests in it.
struct ViewContext
{
  View view = 0;
  crypto::PublicKey counter_key;
};

/// Stateless checks of every signature, quorum, distinctness and binding rule,
/// against the genesis key registry.
class Validator
{
public:
  explicit Validator(const Genesis& genesis) : genesis_(&genesis) {}

  const Genesis& genesis() const { return *genesis_; }
  const ProtocolParams& params() const { return genesis_->params; }

  /// Key that orders requests in the view `cert` certifies: the attested
  /// counter instance, or the primary's own key for the baselines.
  crypto::PublicKey counter_key(const msg::ViewCertificate& cert) const;

  Verdict request(const msg::RequestMsg& m) const;
  Verdict order_request(const msg::OrderRequestMsg& m,
                        const crypto::PublicKey& counter_key) const;
  Verdict reply(const msg::ReplyMsg& m) const;
  Verdict req_view_change(const msg::ReqViewChangeMsg& m) const;
  Verdict view_confirm(const msg::ViewConfirmMsg& m) const;
  Verdict checkpoint(const msg::CheckpointMsg& m) const;
  Verdict checkpoint_certificate(const msg::CheckpointCertificate& c) const;
  Verdict view_certificate(const msg::ViewCertificate& c) const;
  Verdict attestation(View view, const std::optional<msg::CounterAttestation>& a) const;
  Verdict view_change(const msg::ViewChangeMsg& m, ChainSummary* summary = nullptr) const;
  Verdict new_view(const msg::NewViewMsg& m,
                   std::vector<ChainSummary>* summaries = nullptr) const;
  Verdict commit(const msg::CommitMsg& m) const;
  /// commit_threshold distinct, valid, matching replies.
  Verdict commit_certificate(const std::vector<msg::ReplyMsg>& replies) const;
  Verdict local_commit(const msg::LocalCommitMsg& m) const;
  /// True when the two order-requests convict the primary of the view `cert`
  /// certifies.
  Verdict misbehavior_proof(const msg::MisbehaviorProofMsg& m,
                            const msg::ViewCertificate& cert) const;

  /// Full validation of any message kind. Unsigned kinds only get structural
  /// checks.
  Verdict validate(const msg::Message& m, const ViewContext& ctx) const;

  /// True iff every signature the message carries, at any nesting depth,
  /// verifies under the key it claims. Ordering certificates are checked
  /// against `counter_keys`. Used to catch adversaries forging signatures.
  bool signatures_valid(const msg::Message& m,
                        const std::set<crypto::PublicKey>& counter_keys) const;

private:
  bool replica_in_range(ReplicaId r) const { return r < params().n; }
  bool client_in_range(ClientId c) const { return c < genesis_->client_keys.size(); }

  const Genesis* genesis_;
};

/// History position, chain digest, view and counter a checkpoint
/// certificate vouches for (the genesis state for an empty certificate).
struct CheckpointPoint
{
  View view = 0;
  Counter counter = 0;
  std::uint64_t position = 0;
  crypto::Digest history_digest;
  crypto::Digest state_digest;
};

CheckpointPoint checkpoint_point(const msg::CheckpointCertificate& c);

} // namespace sacz
