// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "sacz/invariants.hpp"

#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace sacz {

using nlohmann::json;

namespace {

struct Link
{
  std::string parent;
  std::uint64_t position = 0;
};

// Every history digest any correct replica produced, with its parent.
class Chains
{
public:
  explicit Chains(std::string genesis) : genesis_(std::move(genesis))
  {
    links_[genesis_] = {"", 0};
  }

  void add(const std::string& digest, const std::string& parent, std::uint64_t position)
  {
    links_.emplace(digest, Link{parent, position});
  }

  std::optional<std::uint64_t> position(const std::string& digest) const
  {
    auto it = links_.find(digest);
    if (it == links_.end())
      return std::nullopt;
    return it->second.position;
  }

  /// Digest at `length` on the chain ending in `digest`; nullopt if the
  /// chain is shorter or passes through an unknown digest.
  std::optional<std::string> ancestor(std::string digest, std::uint64_t length) const
  {
    while (true)
    {
      auto it = links_.find(digest);
      if (it == links_.end() || it->second.position < length)
        return std::nullopt;
      if (it->second.position == length)
        return digest;
      digest = it->second.parent;
    }
  }

  /// Positions 1..len of the chain ending in `digest`, when fully known.
  std::optional<std::vector<std::string>> path(std::string digest) const
  {
    auto len = position(digest);
    if (!len)
      return std::nullopt;
    std::vector<std::string> out(*len + 1);
    for (auto p = *len;; --p)
    {
      auto it = links_.find(digest);
      if (it == links_.end() || it->second.position != p)
        return std::nullopt;
      out[p] = digest;
      if (p == 0)
        break;
      digest = it->second.parent;
    }
    return out;
  }

private:
  std::string genesis_;
  std::map<std::string, Link> links_;
};

struct Completed
{
  std::size_t index;
  std::uint64_t client;
  std::uint64_t id;
  std::uint64_t view;
  std::string digest;
};

std::string req_str(const json& r)
{
  std::ostringstream s;
  s << "c" << r.at(0).get<std::uint64_t>() << "#" << r.at(1).get<std::uint64_t>();
  return s.str();
}

class Checker
{
public:
  explicit Checker(const Transcript& t)
    : t_(t), header_(t.header()), chains_(header_.value("genesis_digest", ""))
  {
    for (const auto& f : header_.at("faults"))
    {
      auto kind = f.at("kind").get<std::string>();
      auto r = f.at("replica").get<std::uint32_t>();
      faulty_.insert(r);
      if (kind == "byzantine")
        byzantine_.insert(r);
    }
    sac_ = header_.at("variant").get<std::string>() == "saczyzzyva";
  }

  std::vector<Violation> run()
  {
    collect();
    prefix_safety();
    view_change_inclusion();
    per_record();
    initial_view_consistency();
    liveness();
    return std::move(out_);
  }

private:
  bool correct_replica(std::uint32_t r) const { return !byzantine_.count(r); }

  // Nodes whose links the synchrony bound covers: no fault of any kind.
  bool well_behaved(const std::string& node) const
  {
    if (node.empty() || node[0] != 'r')
      return true;
    return !faulty_.count(static_cast<std::uint32_t>(std::stoul(node.substr(1))));
  }

  void report(std::string invariant, std::size_t index, std::string detail)
  {
    out_.push_back({std::move(invariant), index, std::move(detail)});
  }

  void collect()
  {
    for (std::size_t i = 0; i < t_.records.size(); ++i)
    {
      const auto& r = t_.records[i];
      auto type = r.value("type", "");
      if (type == "exec" && correct_replica(r.at("replica").get<std::uint32_t>()))
        chains_.add(r.at("digest"), r.at("parent"), r.at("position"));
      else if (type == "complete")
        completed_.push_back({i, r.at("client"), r.at("id"), r.at("view"), r.at("digest")});
    }
  }

  void prefix_safety()
  {
    struct Known
    {
      const Completed* c;
      std::vector<std::string> path;
    };
    std::vector<Known> known;
    for (const auto& c : completed_)
      if (auto p = chains_.path(c.digest))
        known.push_back({&c, std::move(*p)});
    for (std::size_t a = 0; a < known.size(); ++a)
      for (std::size_t b = a + 1; b < known.size(); ++b)
      {
        const auto& x = known[a].path.size() <= known[b].path.size() ? known[a] : known[b];
        const auto& y = &x == &known[a] ? known[b] : known[a];
        auto len = x.path.size() - 1;
        if (y.path[len] != x.path[len])
        {
          auto later = std::max(x.c->index, y.c->index);
          report("prefix_safety", later,
                 "completed histories of c" + std::to_string(x.c->client) + "#" +
                   std::to_string(x.c->id) + " and c" + std::to_string(y.c->client) +
                   "#" + std::to_string(y.c->id) + " diverge at or before position " +
                   std::to_string(len));
        }
      }
  }

  void view_change_inclusion()
  {
    for (std::size_t i = 0; i < t_.records.size(); ++i)
    {
      const auto& r = t_.records[i];
      if (r.value("type", "") != "install" ||
          !correct_replica(r.at("replica").get<std::uint32_t>()))
        continue;
      auto view = r.at("view").get<std::uint64_t>();
      auto start = r.at("start_digest").get<std::string>();
      auto start_len = r.at("start_length").get<std::uint64_t>();
      for (const auto& c : completed_)
      {
        if (c.view >= view)
          continue;
        auto len = chains_.position(c.digest);
        if (!len)
          continue;
        bool included = *len <= start_len && chains_.ancestor(start, *len) == c.digest;
        // An unknown start chain cannot be judged either way.
        if (!included && *len <= start_len && !chains_.ancestor(start, *len))
          continue;
        if (!included)
          report("view_change_inclusion", i,
                 "replica " + std::to_string(r.at("replica").get<std::uint32_t>()) +
                   " installed view " + std::to_string(view) + " without c" +
                   std::to_string(c.client) + "#" + std::to_string(c.id) +
                   " completed in view " + std::to_string(c.view));
      }
    }
  }

  struct ReplicaTrack
  {
    std::uint64_t view = 0;
    std::uint64_t last = 0;
    bool changing = false;
  };

  void per_record()
  {
    auto completion = header_.at("nominal_completion").get<std::uint64_t>();
    auto commit = header_.at("commit_threshold").get<std::uint64_t>();
    auto quorum = header_.at("quorum").get<std::uint64_t>();
    auto gst = header_.at("gst").get<std::uint64_t>();
    auto bound = header_.at("bound").get<std::uint64_t>();

    std::map<std::uint32_t, ReplicaTrack> track;
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::string> slot_request;
    std::map<std::pair<std::string, std::uint64_t>, std::string> certified;

    for (std::size_t i = 0; i < t_.records.size(); ++i)
    {
      const auto& r = t_.records[i];
      auto type = r.value("type", "");
      if (type == "send")
      {
        auto kind = r.at("kind").get<std::string>();
        auto from = r.at("from").get<std::string>();
        bool byz = r.value("byz", false);
        if (sac_ && kind == "ORDER-REQUEST" && !r.at("ckey").get<std::string>().empty())
        {
          // Holds for every sender: the counter signs each value once.
          auto key = std::make_pair(r.at("ckey").get<std::string>(),
                                    r.at("counter").get<std::uint64_t>());
          auto digest = r.at("digest").get<std::string>();
          auto [it, fresh] = certified.emplace(key, digest);
          if (!fresh && it->second != digest)
            report("non_equivocation", i,
                   "counter value " + std::to_string(key.second) +
                     " certified for two different requests");
        }
        if (!byz && kind == "REPLY" && r.value("phase", "") == "view_changing")
          report("phase_discipline", i, from + " replied while changing views");
        auto t = r.at("t").get<std::uint64_t>();
        if (t >= gst && !r.value("lost", false) && well_behaved(from) &&
            well_behaved(r.at("to").get<std::string>()) &&
            r.at("deliver").get<std::uint64_t>() - t > bound)
          report("weak_synchrony", i,
                 "delivery took " + std::to_string(r.at("deliver").get<std::uint64_t>() - t) +
                   " after GST");
      }
      else if (type == "phase")
      {
        auto rep = r.at("replica").get<std::uint32_t>();
        track[rep].changing = r.at("phase").get<std::string>() == "view_changing";
      }
      else if (type == "install")
      {
        auto rep = r.at("replica").get<std::uint32_t>();
        if (!correct_replica(rep))
          continue;
        track[rep].view = r.at("view");
        track[rep].last = 0;
        if (r.at("confirms").get<std::uint64_t>() < quorum)
          report("quorum_threshold", i, "view installed on fewer than n-f confirms");
      }
      else if (type == "state_transfer")
      {
        auto rep = r.at("replica").get<std::uint32_t>();
        auto& tr = track[rep];
        if (r.at("view").get<std::uint64_t>() == tr.view)
          tr.last = std::max(tr.last, r.at("counter").get<std::uint64_t>());
      }
      else if (type == "checkpoint_stable")
      {
        auto rep = r.at("replica").get<std::uint32_t>();
        if (correct_replica(rep) && r.at("signers").get<std::uint64_t>() < quorum)
          report("quorum_threshold", i, "checkpoint stable on fewer than n-f signers");
      }
      else if (type == "exec")
      {
        auto rep = r.at("replica").get<std::uint32_t>();
        if (!correct_replica(rep) || r.at("replay").get<bool>())
          continue;
        auto& tr = track[rep];
        auto view = r.at("view").get<std::uint64_t>();
        auto counter = r.at("counter").get<std::uint64_t>();
        if (tr.changing)
          report("phase_discipline", i,
                 "replica " + std::to_string(rep) + " executed while changing views");
        if (view != tr.view || counter != tr.last + 1)
          report("counter_consecutive", i,
                 "replica " + std::to_string(rep) + " executed (" + std::to_string(view) +
                   ", " + std::to_string(counter) + ") after (" + std::to_string(tr.view) +
                   ", " + std::to_string(tr.last) + ")");
        tr.view = view;
        tr.last = counter;
        if (sac_)
        {
          auto req = req_str(r.at("req"));
          auto [it, fresh] = slot_request.emplace(std::make_pair(view, counter), req);
          if (!fresh && it->second != req)
            report("intra_view_consistency", i,
                   "(" + std::to_string(view) + ", " + std::to_string(counter) +
                     ") executed as both " + it->second + " and " + req);
        }
      }
      else if (type == "complete")
      {
        bool fallback = r.at("fallback").get<bool>();
        auto matching = r.at("matching").get<std::uint64_t>();
        auto need = fallback ? commit : completion;
        if (matching < need)
          report("quorum_threshold", i,
                 "completed with " + std::to_string(matching) + " matching " +
                   (fallback ? "local commits" : "replies") + ", need " +
                   std::to_string(need));
      }
    }
  }

  void initial_view_consistency()
  {
    std::map<std::uint64_t, std::tuple<std::uint64_t, std::string, std::string>> first;
    for (std::size_t i = 0; i < t_.records.size(); ++i)
    {
      const auto& r = t_.records[i];
      if (r.value("type", "") != "install" ||
          !correct_replica(r.at("replica").get<std::uint32_t>()))
        continue;
      auto state = std::make_tuple(r.at("start_length").get<std::uint64_t>(),
                                   r.at("start_digest").get<std::string>(),
                                   r.at("ckey").get<std::string>());
      auto [it, fresh] = first.emplace(r.at("view").get<std::uint64_t>(), state);
      if (!fresh && it->second != state)
        report("initial_view_consistency", i,
               "view " + std::to_string(it->first) + " installed with two starting states");
    }
  }

  void liveness()
  {
    std::set<std::pair<std::uint64_t, std::uint64_t>> done;
    for (const auto& c : completed_)
      done.insert({c.client, c.id});
    for (std::size_t i = 0; i < t_.records.size(); ++i)
    {
      const auto& r = t_.records[i];
      if (r.value("type", "") == "submit" &&
          !done.count({r.at("client").get<std::uint64_t>(), r.at("id").get<std::uint64_t>()}))
        report("liveness", i,
               "c" + std::to_string(r.at("client").get<std::uint64_t>()) + "#" +
                 std::to_string(r.at("id").get<std::uint64_t>()) + " never completed");
    }
  }

  const Transcript& t_;
  const json& header_;
  Chains chains_;
  std::set<std::uint32_t> faulty_;
  std::set<std::uint32_t> byzantine_;
  bool sac_ = false;
  std::vector<Completed> completed_;
  std::vector<Violation> out_;
};

} // namespace

const std::vector<std::string>& invariant_names()
{
  static const std::vector<std::string> names{
    "prefix_safety",     "view_change_inclusion",    "intra_view_consistency",
    "counter_consecutive", "non_equivocation",       "quorum_threshold",
    "phase_discipline",  "initial_view_consistency", "weak_synchrony",
    "liveness"};
  return names;
}

bool is_safety_violation(const Violation& v)
{
  return v.invariant == "prefix_safety" || v.invariant == "view_change_inclusion";
}

std::vector<Violation> check_invariants(const Transcript& transcript)
{
  if (transcript.records.empty())
    return {};
  return Checker(transcript).run();
}

} // namespace sacz
