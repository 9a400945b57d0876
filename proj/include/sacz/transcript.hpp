// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace sacz {

/// One JSON object per event, in the order the simulator produced them.
/// The first record describes the scenario, the last one closes the run.
struct Transcript
{
  std::vector<nlohmann::json> records;

  void write_jsonl(std::ostream& out) const;
  std::string to_jsonl() const;
  static Transcript read_jsonl(std::istream& in);

  const nlohmann::json& header() const { return records.front(); }
};

} // namespace sacz
