// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include "sacz/crypto.hpp"
#include "sacz/tmc.hpp"

#include <optional>

namespace sacz {

/// Source of ordering certificates for the primary of one view.
class Sequencer
{
public:
  virtual ~Sequencer() = default;

  virtual tmc::OrderingCertificate next(const crypto::Digest& digest) = 0;
  virtual std::uint64_t value() const = 0;

  /// A certificate for an arbitrary counter value, if this sequencer can
  /// produce one. Only key-holding sequencers can; a trusted counter never
  /// signs a value twice.
  virtual std::optional<tmc::OrderingCertificate> certify_at(std::uint64_t,
                                                             const crypto::Digest&)
  {
    return std::nullopt;
  }
};

/// Backed by a trusted counter instance.
class CounterSequencer final : public Sequencer
{
public:
  explicit CounterSequencer(tmc::CounterInstance instance)
    : instance_(std::move(instance))
  {}

  tmc::OrderingCertificate next(const crypto::Digest& digest) override
  {
    return instance_.increment(digest);
  }

  std::uint64_t value() const override { return instance_.value(); }

private:
  tmc::CounterInstance instance_;
};

} // namespace sacz
