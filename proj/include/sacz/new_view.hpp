// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include "sacz/messages.hpp"
#include "sacz/validation.hpp"

#include <optional>
#include <vector>

namespace sacz {

/// The starting state a new-view message determines: a checkpoint snapshot
/// plus the ordered requests to replay on top of it.
struct NewViewState
{
  View view = 0;
  std::optional<msg::CounterAttestation> attestation;
  crypto::Digest start_digest;
  std::uint64_t start_length = 0;
  ReplicaId source = 0; // view-change the state was taken from
  msg::CheckpointCertificate checkpoint;
  msg::AppSnapshot snapshot;
  std::vector<msg::OrderRequestMsg> replay;

  crypto::Digest summary_digest() const
  {
    return msg::new_view_summary_digest(view, attestation, start_digest, start_length);
  }
};

/// Picks the highest base view among the view-changes, then the longest
/// history prefix in that view reported by at least `inclusion_threshold`
/// of them (1 for the trusted-counter variant: any reported prefix is
/// counter-certified). `summaries` are the per-view-change chains produced
/// by Validator::new_view.
NewViewState compute_new_view_state(const msg::NewViewMsg& nv,
                                    const std::vector<ChainSummary>& summaries,
                                    std::uint32_t inclusion_threshold);

/// Validates and computes in one step; nullopt if `nv` is invalid.
std::optional<NewViewState> compute_new_view_state(const msg::NewViewMsg& nv,
                                                   const Validator& validator);

} // namespace sacz
