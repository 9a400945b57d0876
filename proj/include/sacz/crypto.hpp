// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sacz {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s)
{
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline Bytes to_bytes(std::string_view s)
{
  return {s.begin(), s.end()};
}

inline std::string to_string(ByteView b)
{
  return {b.begin(), b.end()};
}

std::string to_hex(ByteView bytes);

} // namespace sacz

namespace sacz::crypto {

inline constexpr std::size_t digest_size = 32;

/// Fixed-length SHA-256 output.
struct Digest
{
  std::array<std::uint8_t, digest_size> bytes{};

  auto operator<=>(const Digest&) const = default;
  std::string hex() const { return to_hex(bytes); }
  static Digest from_hex(std::string_view hex);
};

/// Which signature construction a key belongs to.
///
/// `Ed25519` is the production scheme. `Simulated` is a deterministic keyed-MAC
/// construction for reproducible simulations: tags are HMAC-SHA256 under the
/// signer's secret and verification goes through a process-wide key authority,
/// so holding a public key never grants the ability to sign.
enum class Scheme : std::uint8_t
{
  Ed25519 = 1,
  Simulated = 2,
};

struct PublicKey
{
  Scheme scheme = Scheme::Simulated;
  std::array<std::uint8_t, 32> bytes{};

  auto operator<=>(const PublicKey&) const = default;
  std::string hex() const { return to_hex(bytes); }
};

struct Signature
{
  std::array<std::uint8_t, 64> bytes{};

  auto operator<=>(const Signature&) const = default;
};

using Seed = std::array<std::uint8_t, 32>;

class KeyPair
{
public:
  /// Deterministic key generation from a 32-byte seed.
  static KeyPair from_seed(const Seed& seed, Scheme scheme = Scheme::Simulated);

  /// Derives a seed from a run seed and a role label, e.g. "replica/3".
  static KeyPair derive(std::uint64_t run_seed, std::string_view label,
                        Scheme scheme = Scheme::Simulated);

  const PublicKey& public_key() const { return public_; }
  Signature sign(ByteView message) const;

private:
  KeyPair() = default;

  PublicKey public_;
  std::array<std::uint8_t, 64> secret_{};
};

bool verify(const PublicKey& key, ByteView message, const Signature& signature);

Digest hash(ByteView message);
Digest hash(std::string_view message);

Seed derive_seed(std::uint64_t run_seed, std::string_view label);

} // namespace sacz::crypto
