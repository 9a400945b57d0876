// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "sacz/baselines.hpp"

#include <map>

namespace sacz::baseline {

tmc::OrderingCertificate SignedSequencer::next(const crypto::Digest& digest)
{
  return *certify_at(++counter_, digest);
}

std::optional<tmc::OrderingCertificate>
SignedSequencer::certify_at(std::uint64_t counter, const crypto::Digest& digest)
{
  tmc::OrderingCertificate c;
  c.counter = counter;
  c.message_digest = digest;
  c.signature = key_.sign(tmc::certificate_payload(counter, digest));
  return c;
}

std::optional<std::vector<msg::ReplyMsg>>
commit_certificate(const std::vector<msg::ReplyMsg>& replies, std::uint32_t f)
{
  std::map<crypto::Digest, std::map<ReplicaId, const msg::ReplyMsg*>> groups;
  for (const auto& r : replies)
    groups[msg::reply_match_key(r)].emplace(r.replica, &r);
  for (const auto& [key, by_replica] : groups)
  {
    if (by_replica.size() < 2 * f + 1)
      continue;
    std::vector<msg::ReplyMsg> out;
    for (const auto& [id, r] : by_replica)
    {
      out.push_back(*r);
      if (out.size() == 2 * f + 1)
        break;
    }
    return out;
  }
  return std::nullopt;
}

bool consistent_with_history(const msg::CommitMsg& commit, const msg::ClientRecord* record)
{
  if (record == nullptr || commit.certificate.empty())
    return false;
  const auto& r = commit.certificate.front();
  return record->id == commit.request_id &&
         record->history_digest == r.history_digest && record->order == r.order;
}

} // namespace sacz::baseline
