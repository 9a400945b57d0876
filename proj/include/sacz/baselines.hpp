// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include "sacz/config.hpp"
#include "sacz/sequencer.hpp"

#include <optional>
#include <vector>

namespace sacz::baseline {

/// Zyzzyva-style ordering: the primary signs sequence numbers with its own
/// replica key. Nothing stops a faulty primary from signing one number twice.
class SignedSequencer final : public Sequencer
{
public:
  explicit SignedSequencer(crypto::KeyPair key) : key_(std::move(key)) {}

  tmc::OrderingCertificate next(const crypto::Digest& digest) override;
  std::uint64_t value() const override { return counter_; }
  std::optional<tmc::OrderingCertificate> certify_at(std::uint64_t counter,
                                                     const crypto::Digest& digest) override;

private:
  crypto::KeyPair key_;
  std::uint64_t counter_ = 0;
};

/// The 2f+1 matching replies a Zyzzyva client broadcasts in the fallback, or
/// nullopt if it does not hold that many.
std::optional<std::vector<msg::ReplyMsg>>
commit_certificate(const std::vector<msg::ReplyMsg>& replies, std::uint32_t f);

/// Whether a replica whose client table holds `record` for the certificate's
/// client may acknowledge the certificate.
bool consistent_with_history(const msg::CommitMsg& commit,
                             const msg::ClientRecord* record);

} // namespace sacz::baseline
