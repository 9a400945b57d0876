// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "sacz/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace sacz {

std::string to_hex(ByteView bytes)
{
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes)
  {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

} // namespace sacz

namespace sacz::crypto {

namespace {

void ensure_sodium()
{
  static const bool ready = [] {
    if (sodium_init() < 0)
      throw std::runtime_error("libsodium initialisation failed");
    return true;
  }();
  (void)ready;
}

// Verification oracle for the simulated scheme. Public key -> MAC key.
class KeyAuthority
{
public:
  static KeyAuthority& instance()
  {
    static KeyAuthority authority;
    return authority;
  }

  void enroll(const PublicKey& pk, const std::array<std::uint8_t, 32>& mac_key)
  {
    std::lock_guard lock(mutex_);
    keys_.emplace(pk.bytes, mac_key);
  }

  bool lookup(const PublicKey& pk, std::array<std::uint8_t, 32>& out) const
  {
    std::lock_guard lock(mutex_);
    auto it = keys_.find(pk.bytes);
    if (it == keys_.end())
      return false;
    out = it->second;
    return true;
  }

private:
  mutable std::mutex mutex_;
  std::map<std::array<std::uint8_t, 32>, std::array<std::uint8_t, 32>> keys_;
};

void mac(const std::array<std::uint8_t, 32>& key, ByteView message,
         std::uint8_t* out)
{
  crypto_auth_hmacsha256_state st;
  crypto_auth_hmacsha256_init(&st, key.data(), key.size());
  crypto_auth_hmacsha256_update(&st, message.data(), message.size());
  crypto_auth_hmacsha256_final(&st, out);
}

int hex_value(char c)
{
  if (c >= '0' && c <= '9')
    return c - '0';
  if (c >= 'a' && c <= 'f')
    return c - 'a' + 10;
  if (c >= 'A' && c <= 'F')
    return c - 'A' + 10;
  return -1;
}

} // namespace

Digest Digest::from_hex(std::string_view hex)
{
  if (hex.size() != digest_size * 2)
    throw std::invalid_argument("digest hex must be 64 characters");
  Digest d;
  for (std::size_t i = 0; i < digest_size; ++i)
  {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0)
      throw std::invalid_argument("bad hex digit in digest");
    d.bytes[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return d;
}

Seed derive_seed(std::uint64_t run_seed, std::string_view label)
{
  ensure_sodium();
  crypto_hash_sha256_state st;
  crypto_hash_sha256_init(&st);
  std::uint8_t s[8];
  for (int i = 0; i < 8; ++i)
    s[i] = static_cast<std::uint8_t>(run_seed >> (8 * i));
  crypto_hash_sha256_update(&st, s, sizeof s);
  crypto_hash_sha256_update(
    &st, reinterpret_cast<const unsigned char*>(label.data()), label.size());
  Seed out;
  crypto_hash_sha256_final(&st, out.data());
  return out;
}

KeyPair KeyPair::from_seed(const Seed& seed, Scheme scheme)
{
  ensure_sodium();
  KeyPair kp;
  kp.public_.scheme = scheme;
  if (scheme == Scheme::Ed25519)
  {
    crypto_sign_ed25519_seed_keypair(
      kp.public_.bytes.data(), kp.secret_.data(), seed.data());
    return kp;
  }
  // Simulated: MAC key = H("mac" || seed), public token = H("pk" || mac key).
  std::array<std::uint8_t, 32> mac_key;
  {
    crypto_hash_sha256_state st;
    crypto_hash_sha256_init(&st);
    crypto_hash_sha256_update(&st, reinterpret_cast<const unsigned char*>("mac"), 3);
    crypto_hash_sha256_update(&st, seed.data(), seed.size());
    crypto_hash_sha256_final(&st, mac_key.data());
  }
  {
    crypto_hash_sha256_state st;
    crypto_hash_sha256_init(&st);
    crypto_hash_sha256_update(&st, reinterpret_cast<const unsigned char*>("pk"), 2);
    crypto_hash_sha256_update(&st, mac_key.data(), mac_key.size());
    crypto_hash_sha256_final(&st, kp.public_.bytes.data());
  }
  std::memcpy(kp.secret_.data(), mac_key.data(), mac_key.size());
  KeyAuthority::instance().enroll(kp.public_, mac_key);
  return kp;
}

KeyPair KeyPair::derive(std::uint64_t run_seed, std::string_view label,
                        Scheme scheme)
{
  return from_seed(derive_seed(run_seed, label), scheme);
}

Signature KeyPair::sign(ByteView message) const
{
  Signature sig;
  if (public_.scheme == Scheme::Ed25519)
  {
    crypto_sign_ed25519_detached(
      sig.bytes.data(), nullptr, message.data(), message.size(), secret_.data());
    return sig;
  }
  std::array<std::uint8_t, 32> key;
  std::memcpy(key.data(), secret_.data(), key.size());
  mac(key, message, sig.bytes.data());
  return sig;
}

bool verify(const PublicKey& key, ByteView message, const Signature& signature)
{
  ensure_sodium();
  if (key.scheme == Scheme::Ed25519)
    return crypto_sign_ed25519_verify_detached(
             signature.bytes.data(), message.data(), message.size(),
             key.bytes.data()) == 0;
  if (key.scheme != Scheme::Simulated)
    return false;
  std::array<std::uint8_t, 32> mac_key;
  if (!KeyAuthority::instance().lookup(key, mac_key))
    return false;
  std::array<std::uint8_t, 32> expected;
  mac(mac_key, message, expected.data());
  if (sodium_memcmp(expected.data(), signature.bytes.data(), 32) != 0)
    return false;
  // Upper half of a simulated signature is always zero.
  for (std::size_t i = 32; i < signature.bytes.size(); ++i)
    if (signature.bytes[i] != 0)
      return false;
  return true;
}

Digest hash(ByteView message)
{
  ensure_sodium();
  Digest d;
  crypto_hash_sha256(d.bytes.data(), message.data(), message.size());
  return d;
}

Digest hash(std::string_view message)
{
  return hash(as_bytes(message));
}

} // namespace sacz::crypto
