// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include "sacz/crypto.hpp"
#include "sacz/messages.hpp"
#include "sacz/tmc.hpp"
#include "sacz/types.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace sacz {

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum class Variant
{
  SACZyzzyva,
  Zyzzyva,
  Zyzzyva5,
};

std::string_view variant_name(Variant v);
std::optional<Variant> parse_variant(std::string_view name);

struct Thresholds
{
  std::uint32_t n = 0;
  std::uint32_t completion = 0;
  bool fallback = false;

  bool operator==(const Thresholds&) const = default;
};

Thresholds variant_thresholds(Variant v, std::uint32_t f);

struct ProtocolParams
{
  Variant variant = Variant::SACZyzzyva;
  std::uint32_t f = 1;
  std::uint32_t n = 4;
  std::uint32_t n_tmc = 4;
  std::uint32_t completion = 3; // matching replies a client needs
  bool fallback = false;
  std::uint64_t checkpoint_interval = 10;
  std::uint64_t watermark_windows = 2;
  Time replica_timeout = 80;
  Time client_timeout = 40;

  /// Defaults for `v` at fault budget `f`: n, completion threshold and, for
  /// the trusted-counter variant, every replica equipped with a counter.
  static ProtocolParams for_variant(Variant v, std::uint32_t f);

  bool uses_tmc() const { return variant == Variant::SACZyzzyva; }
  std::uint32_t quorum() const { return n - f; }
  std::uint32_t accuse_threshold() const { return f + 1; }
  std::uint32_t commit_threshold() const { return 2 * f + 1; }
  std::uint32_t inclusion_threshold() const { return uses_tmc() ? 1 : f + 1; }
  std::uint64_t window() const { return checkpoint_interval * watermark_windows; }

  ReplicaId primary(View v) const
  {
    return static_cast<ReplicaId>(uses_tmc() ? v % n_tmc : v % n);
  }

  bool has_tmc(ReplicaId r) const { return uses_tmc() && r < n_tmc; }

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// Public keys everyone agrees on before the system starts. The view-0
/// certificate is part of it, so view 0 needs no confirms.
struct Genesis
{
  ProtocolParams params;
  std::vector<crypto::PublicKey> replica_keys;
  std::vector<std::optional<crypto::PublicKey>> tmc_keys;
  std::vector<crypto::PublicKey> client_keys;
  msg::ViewCertificate view0;
};

struct ReplicaSecrets
{
  crypto::KeyPair key;
  std::shared_ptr<tmc::TrustedComponent> tmc;        // null when not equipped
  std::optional<tmc::CounterInstance> view0_counter; // only for the view-0 primary
};

struct System
{
  Genesis genesis;
  std::vector<ReplicaSecrets> replicas;
  std::vector<crypto::KeyPair> clients;
};

/// Deterministically provisions keys, trusted components and the genesis
/// view certificate for a run.
System make_system(const ProtocolParams& params, std::uint64_t seed,
                   std::uint32_t clients,
                   crypto::Scheme scheme = crypto::Scheme::Simulated);

} // namespace sacz
