// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "sacz/transcript.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sacz {

void Transcript::write_jsonl(std::ostream& out) const
{
  for (const auto& r : records)
    out << r.dump() << '\n';
}

std::string Transcript::to_jsonl() const
{
  std::ostringstream out;
  write_jsonl(out);
  return out.str();
}

Transcript Transcript::read_jsonl(std::istream& in)
{
  Transcript t;
  std::string line;
  while (std::getline(in, line))
  {
    if (line.empty())
      continue;
    t.records.push_back(nlohmann::json::parse(line));
  }
  if (t.records.empty() || t.records.front().value("type", "") != "scenario")
    throw std::runtime_error("transcript must start with a scenario record");
  return t;
}

} // namespace sacz
