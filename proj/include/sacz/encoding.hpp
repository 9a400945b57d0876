// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include "sacz/crypto.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sacz {

class DecodeError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Canonical encoding: little-endian fixed-width integers, u32 length prefixes,
// fields in declaration order. Digests of messages are taken over this form.
class Writer
{
public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void boolean(bool v) { u8(v ? 1 : 0); }

  void u32(std::uint32_t v)
  {
    for (int i = 0; i < 4; ++i)
      buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void u64(std::uint64_t v)
  {
    for (int i = 0; i < 8; ++i)
      buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void bytes(ByteView b)
  {
    u32(static_cast<std::uint32_t>(b.size()));
    buf_.insert(buf_.end(), b.begin(), b.end());
  }

  void str(std::string_view s) { bytes(as_bytes(s)); }

  template <std::size_t N>
  void fixed(const std::array<std::uint8_t, N>& a)
  {
    buf_.insert(buf_.end(), a.begin(), a.end());
  }

  void digest(const crypto::Digest& d) { fixed(d.bytes); }
  void signature(const crypto::Signature& s) { fixed(s.bytes); }
  void public_key(const crypto::PublicKey& k)
  {
    u8(static_cast<std::uint8_t>(k.scheme));
    fixed(k.bytes);
  }

  const Bytes& data() const& { return buf_; }
  Bytes take() && { return std::move(buf_); }

private:
  Bytes buf_;
};

class Reader
{
public:
  explicit Reader(ByteView data) : data_(data) {}

  std::uint8_t u8()
  {
    need(1);
    return data_[pos_++];
  }

  bool boolean()
  {
    auto v = u8();
    if (v > 1)
      throw DecodeError("boolean out of range");
    return v == 1;
  }

  std::uint32_t u32()
  {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
    return v;
  }

  std::uint64_t u64()
  {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
    return v;
  }

  Bytes bytes()
  {
    auto len = u32();
    need(len);
    Bytes out(data_.begin() + pos_, data_.begin() + pos_ + len);
    pos_ += len;
    return out;
  }

  std::string str()
  {
    auto b = bytes();
    return {b.begin(), b.end()};
  }

  template <std::size_t N>
  std::array<std::uint8_t, N> fixed()
  {
    need(N);
    std::array<std::uint8_t, N> a;
    std::copy_n(data_.begin() + pos_, N, a.begin());
    pos_ += N;
    return a;
  }

  crypto::Digest digest() { return {fixed<crypto::digest_size>()}; }
  crypto::Signature signature() { return {fixed<64>()}; }
  crypto::PublicKey public_key()
  {
    auto scheme = u8();
    if (scheme != static_cast<std::uint8_t>(crypto::Scheme::Ed25519) &&
        scheme != static_cast<std::uint8_t>(crypto::Scheme::Simulated))
      throw DecodeError("unknown key scheme");
    return {static_cast<crypto::Scheme>(scheme), fixed<32>()};
  }

  // Length prefix for a sequence; bounded by remaining input to reject
  // absurd counts before allocating.
  std::uint32_t count()
  {
    auto n = u32();
    if (n > remaining())
      throw DecodeError("sequence length exceeds input");
    return n;
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }

private:
  void need(std::size_t n) const
  {
    if (data_.size() - pos_ < n)
      throw DecodeError("truncated input");
  }

  ByteView data_;
  std::size_t pos_ = 0;
};

} // namespace sacz
