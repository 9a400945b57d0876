// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include "sacz/crypto.hpp"

#include <memory>
#include <stdexcept>
#include <utility>

namespace sacz::tmc {

using crypto::Digest;
using crypto::PublicKey;
using crypto::Signature;

/// Counter-signed binding of a message digest to one counter value.
struct OrderingCertificate
{
  std::uint64_t counter = 0;
  Digest message_digest;
  Signature signature;

  bool operator==(const OrderingCertificate&) const = default;
};

/// An instance public key signed by the identity key of the trusted component
/// that created it.
struct CounterAttestation
{
  PublicKey instance_key;
  Signature signature;

  bool operator==(const CounterAttestation&) const = default;
};

enum class ErrorCode
{
  NoTrustedComponent,
  Crashed,
};

class TmcError : public std::runtime_error
{
public:
  explicit TmcError(ErrorCode code);
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

/// Bytes covered by an ordering certificate's signature.
Bytes certificate_payload(std::uint64_t counter, const Digest& digest);
Bytes attestation_payload(const PublicKey& instance_key);

bool verify_certificate(const PublicKey& instance_key,
                        const OrderingCertificate& cert);
bool verify_attestation(const PublicKey& identity_key,
                        const CounterAttestation& attestation);

namespace detail {
struct Device;
struct InstanceState;
} // namespace detail

/// Handle to one counter instance. The host can increment it but can never
/// read the instance secret, so it cannot sign a (counter, digest) pair that
/// the counter did not produce.
class CounterInstance
{
public:
  PublicKey public_key() const;
  std::uint64_t value() const;

  /// c <- c + 1, returning a certificate binding the new c to `digest`.
  /// Throws TmcError(Crashed) once the owning component has crashed.
  OrderingCertificate increment(const Digest& digest);

private:
  friend class TrustedComponent;
  explicit CounterInstance(std::shared_ptr<detail::InstanceState> state)
    : state_(std::move(state))
  {}

  std::shared_ptr<detail::InstanceState> state_;
};

/// The trusted part of a replica. Crash-only: after crash() every instance it
/// created is gone for good, even across restart().
class TrustedComponent
{
public:
  TrustedComponent(const crypto::Seed& seed, crypto::Scheme scheme);

  const PublicKey& identity_key() const;

  /// Creates a fresh instance with counter 0.
  std::pair<CounterInstance, CounterAttestation> init();

  void crash();
  void restart();
  bool crashed() const;

private:
  std::shared_ptr<detail::Device> device_;
};

/// Init on a possibly-absent component; a replica without a trusted
/// component gets NoTrustedComponent.
std::pair<CounterInstance, CounterAttestation> init(TrustedComponent* component);

} // namespace sacz::tmc
