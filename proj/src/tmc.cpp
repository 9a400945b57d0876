// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "sacz/tmc.hpp"

#include "sacz/encoding.hpp"

#include <string>

namespace sacz::tmc {

namespace detail {

struct Device
{
  crypto::KeyPair identity;
  crypto::Seed seed;
  crypto::Scheme scheme;
  std::uint64_t instances_created = 0;
  std::uint64_t epoch = 0; // bumped on crash; instances from older epochs are dead
  bool crashed = false;
};

struct InstanceState
{
  std::shared_ptr<Device> device;
  std::uint64_t epoch;
  crypto::KeyPair key;
  std::uint64_t counter = 0;
};

} // namespace detail

namespace {

const char* describe(ErrorCode code)
{
  switch (code)
  {
    case ErrorCode::NoTrustedComponent:
      return "replica has no trusted component";
    case ErrorCode::Crashed:
      return "trusted component crashed";
  }
  return "trusted component error";
}

} // namespace

TmcError::TmcError(ErrorCode code) : std::runtime_error(describe(code)), code_(code)
{}

Bytes certificate_payload(std::uint64_t counter, const Digest& digest)
{
  Writer w;
  w.str("ORDER-CERT");
  w.u64(counter);
  w.digest(digest);
  return std::move(w).take();
}

Bytes attestation_payload(const PublicKey& instance_key)
{
  Writer w;
  w.str("TMC-INSTANCE");
  w.public_key(instance_key);
  return std::move(w).take();
}

bool verify_certificate(const PublicKey& instance_key,
                        const OrderingCertificate& cert)
{
  if (cert.counter < 1)
    return false;
  return crypto::verify(
    instance_key, certificate_payload(cert.counter, cert.message_digest),
    cert.signature);
}

bool verify_attestation(const PublicKey& identity_key,
                        const CounterAttestation& attestation)
{
  return crypto::verify(identity_key, attestation_payload(attestation.instance_key),
                        attestation.signature);
}

PublicKey CounterInstance::public_key() const
{
  return state_->key.public_key();
}

std::uint64_t CounterInstance::value() const
{
  return state_->counter;
}

OrderingCertificate CounterInstance::increment(const Digest& digest)
{
  const auto& dev = *state_->device;
  if (dev.crashed || dev.epoch != state_->epoch)
    throw TmcError(ErrorCode::Crashed);
  ++state_->counter;
  OrderingCertificate cert;
  cert.counter = state_->counter;
  cert.message_digest = digest;
  cert.signature = state_->key.sign(certificate_payload(cert.counter, digest));
  return cert;
}

TrustedComponent::TrustedComponent(const crypto::Seed& seed, crypto::Scheme scheme)
  : device_(std::make_shared<detail::Device>(detail::Device{
      crypto::KeyPair::from_seed(seed, scheme), seed, scheme}))
{}

const PublicKey& TrustedComponent::identity_key() const
{
  return device_->identity.public_key();
}

std::pair<CounterInstance, CounterAttestation> TrustedComponent::init()
{
  if (device_->crashed)
    throw TmcError(ErrorCode::Crashed);
  auto index = device_->instances_created++;
  std::string label = "instance/" + std::to_string(index);
  auto seed = crypto::derive_seed(0, to_hex(device_->seed) + label);
  auto state = std::make_shared<detail::InstanceState>(detail::InstanceState{
    device_, device_->epoch, crypto::KeyPair::from_seed(seed, device_->scheme)});
  CounterAttestation att;
  att.instance_key = state->key.public_key();
  att.signature = device_->identity.sign(attestation_payload(att.instance_key));
  return {CounterInstance(std::move(state)), att};
}

void TrustedComponent::crash()
{
  device_->crashed = true;
  ++device_->epoch;
}

void TrustedComponent::restart()
{
  device_->crashed = false;
}

bool TrustedComponent::crashed() const
{
  return device_->crashed;
}

std::pair<CounterInstance, CounterAttestation> init(TrustedComponent* component)
{
  if (component == nullptr)
    throw TmcError(ErrorCode::NoTrustedComponent);
  return component->init();
}

} // namespace sacz::tmc
