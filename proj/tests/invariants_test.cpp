// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "support.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <sstream>

using namespace sacz;
using namespace sacz::testing;
using nlohmann::json;

namespace {

// A clean three-request run to tamper with.
class Tampered : public ::testing::Test
{
protected:
  void SetUp() override
  {
    t = sim::run(scenario(Variant::SACZyzzyva, 1, 3, 4));
    ASSERT_TRUE(check_invariants(t).empty());
  }

  std::size_t find(const std::function<bool(const json&)>& pred, std::size_t from = 0) const
  {
    for (auto i = from; i < t.records.size(); ++i)
      if (pred(t.records[i]))
        return i;
    ADD_FAILURE() << "no matching record";
    return 0;
  }

  static auto type_is(std::string type)
  {
    return [type](const json& r) { return r.value("type", "") == type; };
  }

  json exec_at(std::uint32_t replica, std::uint64_t position) const
  {
    return t.records[find([&](const json& r) {
      return r.value("type", "") == "exec" && r["replica"] == replica && r["position"] == position;
    })];
  }

  void insert_before_end(json rec)
  {
    t.records.insert(t.records.end() - 1, std::move(rec));
  }

  std::size_t flagged(std::string_view name) const { return count(check_invariants(t), name); }

  Transcript t;
};

} // namespace

TEST_F(Tampered, ForkedCompletionBreaksPrefixSafety)
{
  auto base = exec_at(1, 1);
  json fork = exec_at(1, 2);
  fork["digest"] = std::string(64, 'f');
  fork["parent"] = base["digest"];
  fork["req"] = json::array({0, 99});
  insert_before_end(fork);
  insert_before_end({{"type", "complete"}, {"client", 0}, {"id", 99}, {"view", 0},
                     {"digest", std::string(64, 'f')}, {"matching", 3}, {"fallback", false},
                     {"response", "OK"}, {"t", 1}, {"latency", 1}});
  EXPECT_GE(flagged("prefix_safety"), 1u);
}

TEST_F(Tampered, ForksFromByzantineReplicasAreIgnored)
{
  t.records[0]["faults"] = json::array(
    {{{"replica", 1}, {"kind", "byzantine"}, {"at", 0}, {"extra", 0}, {"scripts", {"fuzz"}}}});
  json fork = exec_at(1, 2);
  fork["digest"] = std::string(64, 'f');
  fork["req"] = json::array({0, 99});
  insert_before_end(fork);
  EXPECT_EQ(flagged("intra_view_consistency"), 0u);
  EXPECT_EQ(flagged("counter_consecutive"), 0u);
}

TEST_F(Tampered, SameSlotTwoRequests)
{
  auto original = exec_at(3, 3);
  auto i = find([&](const json& r) { return r == original; });
  t.records[i]["req"] = json::array({0, 42});
  EXPECT_GE(flagged("intra_view_consistency"), 1u);
}

TEST_F(Tampered, CounterValueCertifiedTwice)
{
  auto i = find([](const json& r) {
    return r.value("type", "") == "send" && r["kind"] == "ORDER-REQUEST";
  });
  json dup = t.records[i];
  dup["digest"] = std::string(64, 'e');
  insert_before_end(dup);
  EXPECT_EQ(flagged("non_equivocation"), 1u);
}

TEST_F(Tampered, SkippedCounter)
{
  auto i = find([&](const json& r) { return r == exec_at(2, 2); });
  t.records.erase(t.records.begin() + static_cast<std::ptrdiff_t>(i));
  EXPECT_EQ(flagged("counter_consecutive"), 1u);
}

TEST_F(Tampered, CompletionBelowThreshold)
{
  auto i = find(type_is("complete"));
  t.records[i]["matching"] = 2;
  EXPECT_EQ(flagged("quorum_threshold"), 1u);
}

TEST_F(Tampered, ReplyWhileChangingViews)
{
  auto i = find([](const json& r) { return r.value("type", "") == "send" && r["kind"] == "REPLY"; });
  t.records[i]["phase"] = "view_changing";
  EXPECT_EQ(flagged("phase_discipline"), 1u);
}

TEST_F(Tampered, SlowDeliveryAfterGst)
{
  auto i = find([](const json& r) { return r.value("type", "") == "send" && r["from"] != r["to"]; });
  t.records[i]["deliver"] = t.records[i]["t"].get<Time>() + 101;
  EXPECT_EQ(flagged("weak_synchrony"), 1u);
}

TEST_F(Tampered, UnansweredRequest)
{
  insert_before_end({{"type", "submit"}, {"client", 0}, {"id", 77}, {"t", 1}});
  auto vs = check_invariants(t);
  ASSERT_EQ(count(vs, "liveness"), 1u);
  EXPECT_EQ(t.records[vs[0].index]["id"], 77);
}

TEST_F(Tampered, InstallWithoutCompletedRequest)
{
  auto genesis = t.records[0]["genesis_digest"];
  insert_before_end({{"type", "install"}, {"replica", 2}, {"view", 1}, {"start_length", 3},
                     {"start_digest", std::string(64, 'd')}, {"ckey", "k"}, {"confirms", 3},
                     {"source", 2}, {"t", 1}});
  // Unknown start chain: cannot be judged.
  EXPECT_EQ(flagged("view_change_inclusion"), 0u);

  // A known chain that leaves out the completed requests.
  json alt = exec_at(2, 1);
  alt["digest"] = std::string(64, 'a');
  alt["parent"] = genesis;
  alt["replay"] = true;
  insert_before_end(alt);
  insert_before_end({{"type", "install"}, {"replica", 3}, {"view", 1}, {"start_length", 1},
                     {"start_digest", std::string(64, 'a')}, {"ckey", "k"}, {"confirms", 3},
                     {"source", 2}, {"t", 1}});
  EXPECT_GE(flagged("view_change_inclusion"), 1u);
}

TEST_F(Tampered, TwoStartingStatesForOneView)
{
  json a{{"type", "install"}, {"replica", 1}, {"view", 1}, {"start_length", 3},
         {"start_digest", exec_at(1, 3)["digest"]}, {"ckey", "k"}, {"confirms", 3},
         {"source", 1}, {"t", 1}};
  json b = a;
  b["replica"] = 2;
  b["ckey"] = "other";
  insert_before_end(a);
  insert_before_end(b);
  EXPECT_EQ(flagged("initial_view_consistency"), 1u);
}

TEST(Invariants, NamesAreDistinct)
{
  auto names = invariant_names();
  std::set<std::string> unique(names.begin(), names.end());
  EXPECT_EQ(unique.size(), names.size());
  EXPECT_TRUE(is_safety_violation({"prefix_safety", 0, ""}));
  EXPECT_FALSE(is_safety_violation({"liveness", 0, ""}));
}

TEST(Invariants, EmptyTranscriptHasNothingToReport)
{
  EXPECT_TRUE(check_invariants(Transcript{}).empty());
}

TEST(Invariants, SurviveJsonlRoundTrip)
{
  auto s = scenario(Variant::Zyzzyva, 1, 10, 2);
  crash_backups(s, 1);
  auto t = sim::run(s);
  std::stringstream ss;
  t.write_jsonl(ss);
  auto back = Transcript::read_jsonl(ss);
  EXPECT_EQ(back.records, t.records);
  EXPECT_TRUE(check_invariants(back).empty());
}

TEST(Invariants, TranscriptNeedsAHeader)
{
  std::stringstream ss("{\"type\":\"send\"}\n");
  EXPECT_ANY_THROW(Transcript::read_jsonl(ss));
}
