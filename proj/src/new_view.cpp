// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "sacz/new_view.hpp"

#include <algorithm>

namespace sacz {

NewViewState compute_new_view_state(const msg::NewViewMsg& nv,
                                    const std::vector<ChainSummary>& summaries,
                                    std::uint32_t inclusion_threshold)
{
  View vstar = 0;
  for (const auto& s : summaries)
    vstar = std::max(vstar, s.base_view);

  std::vector<std::size_t> in_vstar;
  for (std::size_t i = 0; i < summaries.size(); ++i)
    if (summaries[i].base_view == vstar)
      in_vstar.push_back(i);

  // Anchor on the highest position something certifies: a view start, a
  // stable checkpoint, or a commit certificate. Everything chosen extends it.
  std::uint64_t anchor_len = 0;
  crypto::Digest anchor_digest;
  bool anchored = false;
  for (auto i : in_vstar)
  {
    const auto& s = summaries[i];
    std::vector<std::uint64_t> points{s.start_length};
    if (!nv.view_changes[i].checkpoint.is_genesis())
      points.push_back(s.checkpoint_position);
    if (s.committed)
      points.push_back(*s.committed);
    for (auto len : points)
    {
      auto d = s.at(len);
      if (d && (!anchored || len > anchor_len))
      {
        anchor_len = len;
        anchor_digest = *d;
        anchored = true;
      }
    }
  }

  // Best candidate so far: position, digest and the view-change showing it.
  std::uint64_t best_len = 0;
  crypto::Digest best_digest;
  std::size_t best_idx = summaries.size();

  for (auto i : in_vstar)
  {
    const auto& s = summaries[i];
    if (s.at(anchor_len) != anchor_digest)
      continue;
    for (auto len = anchor_len; len <= s.end(); ++len)
    {
      auto digest = *s.at(len);
      if (len > anchor_len)
      {
        std::size_t support = 0;
        for (auto j : in_vstar)
          if (summaries[j].at(len) == digest)
            ++support;
        if (support < inclusion_threshold)
          break; // longer positions on this chain have no more support
      }
      bool better = best_idx == summaries.size() || len > best_len ||
                    (len == best_len && nv.view_changes[i].replica <
                                          nv.view_changes[best_idx].replica);
      if (better)
      {
        best_len = len;
        best_digest = digest;
        best_idx = i;
      }
    }
  }

  const auto& vc = nv.view_changes.at(best_idx);
  const auto& s = summaries[best_idx];
  NewViewState st;
  st.view = nv.view;
  st.attestation = nv.attestation;
  st.start_digest = best_digest;
  st.start_length = best_len;
  st.source = vc.replica;
  st.checkpoint = vc.checkpoint;
  st.snapshot = vc.snapshot;
  auto count = static_cast<std::ptrdiff_t>(best_len - s.checkpoint_position);
  st.replay.assign(vc.executed.begin(), vc.executed.begin() + count);
  return st;
}

std::optional<NewViewState> compute_new_view_state(const msg::NewViewMsg& nv,
                                                   const Validator& validator)
{
  std::vector<ChainSummary> summaries;
  if (!validator.new_view(nv, &summaries))
    return std::nullopt;
  return compute_new_view_state(nv, summaries, validator.params().inclusion_threshold());
}

} // namespace sacz
