// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "sacz/config.hpp"

#include "sacz/history.hpp"

#include <cctype>
#include <string>

namespace sacz {

std::string_view variant_name(Variant v)
{
  switch (v)
  {
    case Variant::SACZyzzyva: return "saczyzzyva";
    case Variant::Zyzzyva: return "zyzzyva";
    case Variant::Zyzzyva5: return "zyzzyva5";
  }
  return "unknown";
}

std::optional<Variant> parse_variant(std::string_view name)
{
  std::string lower;
  for (char c : name)
    lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "saczyzzyva" || lower == "sac")
    return Variant::SACZyzzyva;
  if (lower == "zyzzyva")
    return Variant::Zyzzyva;
  if (lower == "zyzzyva5")
    return Variant::Zyzzyva5;
  return std::nullopt;
}

Thresholds variant_thresholds(Variant v, std::uint32_t f)
{
  switch (v)
  {
    case Variant::SACZyzzyva: return {3 * f + 1, 2 * f + 1, false};
    case Variant::Zyzzyva: return {3 * f + 1, 3 * f + 1, true};
    case Variant::Zyzzyva5: return {5 * f + 1, 4 * f + 1, false};
  }
  return {};
}

ProtocolParams ProtocolParams::for_variant(Variant v, std::uint32_t f)
{
  auto t = variant_thresholds(v, f);
  ProtocolParams p;
  p.variant = v;
  p.f = f;
  p.n = t.n;
  p.completion = t.completion;
  p.fallback = t.fallback;
  p.n_tmc = v == Variant::SACZyzzyva ? t.n : 0;
  return p;
}

void ProtocolParams::validate() const
{
  if (n == 0)
    throw ConfigError("n must be positive");
  if (n < 3 * f + 1)
    throw ConfigError("n = " + std::to_string(n) + " cannot tolerate f = " +
                      std::to_string(f));
  if (uses_tmc())
  {
    if (n_tmc < f + 1)
      throw ConfigError("n_tmc must be at least f + 1");
    if (n_tmc > n)
      throw ConfigError("n_tmc exceeds n");
  }
  if (completion == 0 || completion > n)
    throw ConfigError("completion threshold out of range");
  if (checkpoint_interval == 0 || watermark_windows == 0)
    throw ConfigError("checkpoint interval and watermark windows must be positive");
  if (replica_timeout == 0 || client_timeout == 0)
    throw ConfigError("timeouts must be positive");
}

System make_system(const ProtocolParams& params, std::uint64_t seed,
                   std::uint32_t clients, crypto::Scheme scheme)
{
  params.validate();
  System sys{{params, {}, {}, {}, {}}, {}, {}};
  auto& g = sys.genesis;

  for (ReplicaId i = 0; i < params.n; ++i)
  {
    auto label = "replica/" + std::to_string(i);
    ReplicaSecrets secrets{crypto::KeyPair::derive(seed, label, scheme), nullptr,
                           std::nullopt};
    g.replica_keys.push_back(secrets.key.public_key());
    if (params.has_tmc(i))
    {
      secrets.tmc = std::make_shared<tmc::TrustedComponent>(
        crypto::derive_seed(seed, "tmc/" + std::to_string(i)), scheme);
      g.tmc_keys.push_back(secrets.tmc->identity_key());
    }
    else
    {
      g.tmc_keys.push_back(std::nullopt);
    }
    sys.replicas.push_back(std::move(secrets));
  }
  for (ClientId c = 0; c < clients; ++c)
  {
    sys.clients.push_back(
      crypto::KeyPair::derive(seed, "client/" + std::to_string(c), scheme));
    g.client_keys.push_back(sys.clients.back().public_key());
  }

  g.view0.view = 0;
  g.view0.start_digest = history::genesis();
  g.view0.start_length = 0;
  if (params.uses_tmc())
  {
    auto& p0 = sys.replicas[params.primary(0)];
    auto [instance, attestation] = p0.tmc->init();
    p0.view0_counter = std::move(instance);
    g.view0.attestation = attestation;
  }
  return sys;
}

} // namespace sacz
