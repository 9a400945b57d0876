// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include "sacz/crypto.hpp"

#include <map>
#include <string>
#include <string_view>

namespace sacz::app {

// A deterministic key-value store. Operations are text:
//   "PUT <key> <value>"  -> "OK"
//   "GET <key>"          -> value, or "" if absent
// Anything else yields "ERR".

using Store = std::map<std::string, std::string>;

Bytes apply(Store& store, ByteView op);

Bytes put(std::string_view key, std::string_view value);
Bytes get(std::string_view key);

} // namespace sacz::app
