// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "support.hpp"

#include "sacz/adversary.hpp"

#include <gtest/gtest.h>
#include <yaml-cpp/yaml.h>

#include <sstream>

using namespace sacz;
using namespace sacz::testing;

namespace {

const char* full = R"(
name: full
variant: zyzzyva
f: 2
checkpoint_interval: 5
timeouts: {replica: 90, client: 45}
seed: 9
network:
  base_delay: 3
  jitter: 1
  bound: 80
  links: [{from: r0, to: c0, delay: 7}]
  partitions:
    - {groups: [[r1], [r0, r2]], from: 10, to: 20}
faults:
  - {replica: 6, kind: crash, at: 30}
  - {replica: 5, kind: slow, extra: 4}
workload: {clients: 2, requests: 3}
)";

std::string header_line(const std::string& csv) { return csv.substr(0, csv.find('\n')); }

} // namespace

TEST(Config, ParsesEveryField)
{
  auto s = harness::parse_scenario(full);
  EXPECT_EQ(s.name, "full");
  EXPECT_EQ(s.params.variant, Variant::Zyzzyva);
  EXPECT_EQ(s.params.f, 2u);
  EXPECT_EQ(s.params.n, 7u);
  EXPECT_EQ(s.params.checkpoint_interval, 5u);
  EXPECT_EQ(s.params.replica_timeout, 90u);
  EXPECT_EQ(s.params.client_timeout, 45u);
  EXPECT_EQ(s.seed, 9u);
  EXPECT_EQ(s.network.base_delay, 3u);
  EXPECT_EQ(s.network.bound, 80u);
  ASSERT_EQ(s.network.links.size(), 1u);
  EXPECT_EQ(s.network.links[0].to, NodeId::client(0));
  ASSERT_EQ(s.network.partitions.size(), 1u);
  EXPECT_EQ(s.network.partitions[0].groups[1].size(), 2u);
  ASSERT_EQ(s.faults.size(), 2u);
  EXPECT_EQ(s.faults[0].kind, sim::FaultKind::Crashed);
  EXPECT_EQ(s.faults[0].at, 30u);
  EXPECT_EQ(s.faults[1].kind, sim::FaultKind::Slow);
  EXPECT_EQ(s.workload.clients, 2u);
  EXPECT_EQ(s.workload.requests, 3u);
}

TEST(Config, DefaultsFollowTheVariant)
{
  auto s = harness::parse_scenario("variant: zyzzyva5\nf: 2\n");
  EXPECT_EQ(s.params.n, 11u);
  EXPECT_EQ(s.params.completion, 9u);
}

TEST(Config, RejectsUnknownKeysWithALine)
{
  try
  {
    harness::parse_scenario("variant: saczyzzyva\nf: 1\nnetwork:\n  jiter: 3\n");
    FAIL();
  }
  catch (const ConfigError& e)
  {
    std::string what = e.what();
    EXPECT_NE(what.find("line 4"), std::string::npos) << what;
    EXPECT_NE(what.find("jiter"), std::string::npos) << what;
  }
}

TEST(Config, RejectsBadValues)
{
  EXPECT_THROW(harness::parse_scenario("variant: pbft\n"), ConfigError);
  EXPECT_THROW(harness::parse_scenario("f: -1\n"), ConfigError);
  EXPECT_THROW(harness::parse_scenario("f: [1]\n"), ConfigError);
  EXPECT_THROW(harness::parse_scenario("faults: [{replica: 0, kind: melted}]\n"), ConfigError);
  EXPECT_THROW(harness::parse_scenario("network: {regions: {x9: 0}}\n"), ConfigError);
  EXPECT_THROW(harness::parse_scenario("f: 1\nfaults: [{replica: 1}, {replica: 2}]\n"),
               ConfigError);
  EXPECT_THROW(harness::parse_scenario("{unclosed"), ConfigError);
  EXPECT_THROW(harness::load_scenario_file("/nonexistent/x.yaml"), ConfigError);
}

TEST(Config, ShippedConfigsLoad)
{
  for (const auto& e : std::filesystem::directory_iterator(SACZ_CONFIG_DIR))
  {
    if (e.path().stem() == "sweep_replicas")
      continue;
    EXPECT_NO_THROW(harness::load_scenario_file(e.path())) << e.path();
  }
}

TEST(Sweep, ParsesRangesAndLists)
{
  auto r = harness::parse_sweep_param("f=1..3");
  EXPECT_EQ(r.key, "f");
  EXPECT_EQ(r.values, (std::vector<std::string>{"1", "2", "3"}));
  auto l = harness::parse_sweep_param("variant=saczyzzyva,zyzzyva");
  EXPECT_EQ(l.values.size(), 2u);
  EXPECT_THROW(harness::parse_sweep_param("f"), ConfigError);
  EXPECT_THROW(harness::parse_sweep_param("f=3..1"), ConfigError);
  EXPECT_THROW(harness::parse_sweep_param("f=a..b"), ConfigError);
}

TEST(Sweep, ExpandsTheCrossProduct)
{
  auto doc = YAML::Load("name: s\nvariant: saczyzzyva\nnetwork: {jitter: 0}\n");
  auto out = harness::expand_sweep(doc, {harness::parse_sweep_param("f=1..2"),
                                         harness::parse_sweep_param("network.jitter=0,5,9")});
  ASSERT_EQ(out.size(), 6u);
  EXPECT_EQ(out[0].params.f, 1u);
  EXPECT_EQ(out[0].network.jitter, 0u);
  EXPECT_EQ(out[5].params.f, 2u);
  EXPECT_EQ(out[5].params.n, 7u);
  EXPECT_EQ(out[5].network.jitter, 9u);
  EXPECT_EQ(out[5].name, "s/f=2/network.jitter=9");
  // The template is left alone.
  EXPECT_EQ(doc["network"]["jitter"].as<int>(), 0);
}

TEST(Suite, ResultsKeepInputOrder)
{
  std::vector<sim::Scenario> all;
  for (std::uint32_t f = 1; f <= 3; ++f)
    all.push_back(scenario(Variant::SACZyzzyva, f, 4, f));
  auto results = harness::run_suite(all, 3);
  ASSERT_EQ(results.size(), 3u);
  for (std::uint32_t f = 1; f <= 3; ++f)
  {
    EXPECT_EQ(results[f - 1].first.f, f);
    EXPECT_EQ(results[f - 1].second.to_jsonl(), sim::run(all[f - 1]).to_jsonl());
  }
}

TEST(Metrics, TallyTheTranscript)
{
  auto t = sim::run(scenario(Variant::SACZyzzyva, 1, 3, 4));
  auto m = harness::metrics(t);
  EXPECT_EQ(m.messages, count_type(t, "send"));
  EXPECT_EQ(m.completed, count_type(t, "complete"));
  ASSERT_EQ(m.requests.size(), 3u);
  std::uint64_t attributed = 0;
  for (const auto& r : m.requests)
  {
    EXPECT_TRUE(r.completed);
    EXPECT_EQ(r.messages, 9u);
    attributed += r.messages;
  }
  EXPECT_LE(attributed, m.messages);
  EXPECT_EQ(m.median_messages, 9.0);
  EXPECT_EQ(m.view_changes, 0u);
}

TEST(Metrics, EmptyWorkloadStillHasAHeader)
{
  auto m = harness::metrics(sim::run(scenario(Variant::SACZyzzyva, 1, 0)));
  std::ostringstream os;
  harness::write_csv(os, {m});
  auto csv = os.str();
  std::string expected;
  for (const auto& c : harness::csv_columns())
    expected += (expected.empty() ? "" : ",") + c;
  EXPECT_EQ(header_line(csv), expected);
  EXPECT_EQ(m.median_latency, std::nullopt);
}

TEST(Metrics, OneRowPerRequestPlusAggregates)
{
  auto m = harness::metrics(sim::run(scenario(Variant::Zyzzyva, 1, 4)));
  std::ostringstream os;
  harness::write_csv(os, {m});
  std::istringstream in(os.str());
  std::size_t rows = 0, requests = 0;
  for (std::string line; std::getline(in, line); ++rows)
    requests += line.rfind("request,", 0) == 0;
  EXPECT_EQ(requests, 4u);
  EXPECT_EQ(rows, 1u + 4u + 2u);
}

TEST(Adversary, ScriptNamesResolve)
{
  for (const auto& name : adv::script_names())
    EXPECT_EQ(adv::make_script(name)->name(), name);
  EXPECT_THROW(adv::make_script("nope"), std::invalid_argument);
}

// Every script, alone, against each variant: no safety invariant may break.
TEST(Adversary, SingleScriptCampaign)
{
  for (auto v : {Variant::SACZyzzyva, Variant::Zyzzyva})
    for (const auto& name : adv::script_names())
      for (std::uint64_t seed = 1; seed <= 3; ++seed)
      {
        auto s = scenario(v, 1, 8, seed);
        byzantine(s, seed % s.params.n, {name});
        for (const auto& violation : check_invariants(sim::run(s)))
          ADD_FAILURE() << variant_name(v) << " " << name << " seed " << seed << ": "
                        << violation.invariant << " " << violation.detail;
      }
}
