// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "sacz/app.hpp"

namespace sacz::app {

namespace {

std::string_view next_token(std::string_view& s)
{
  auto pos = s.find(' ');
  auto tok = s.substr(0, pos);
  s = pos == std::string_view::npos ? std::string_view{} : s.substr(pos + 1);
  return tok;
}

} // namespace

Bytes apply(Store& store, ByteView op)
{
  std::string text = to_string(op);
  std::string_view rest = text;
  auto verb = next_token(rest);
  if (verb == "PUT")
  {
    auto key = next_token(rest);
    if (key.empty())
      return to_bytes("ERR");
    store[std::string(key)] = std::string(rest);
    return to_bytes("OK");
  }
  if (verb == "GET")
  {
    auto key = next_token(rest);
    auto it = store.find(std::string(key));
    return it == store.end() ? Bytes{} : to_bytes(it->second);
  }
  return to_bytes("ERR");
}

Bytes put(std::string_view key, std::string_view value)
{
  std::string s = "PUT ";
  s += key;
  s += ' ';
  s += value;
  return to_bytes(s);
}

Bytes get(std::string_view key)
{
  return to_bytes(std::string("GET ") + std::string(key));
}

} // namespace sacz::app
