// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "sacz/config.hpp"
#include "sacz/scenario.hpp"

#include <gtest/gtest.h>

using namespace sacz;

// Replica counts and how many replicas may be silent without leaving the
// fast path, per protocol; completion is what remains.
struct Row
{
  Variant variant;
  std::uint32_t replicas_per_f;
  std::uint32_t silent_per_f;
  bool fallback;
};

class VariantThresholds : public ::testing::TestWithParam<Row>
{};

TEST_P(VariantThresholds, MatchTheComparisonTable)
{
  auto row = GetParam();
  for (std::uint32_t f = 1; f <= 5; ++f)
  {
    auto p = ProtocolParams::for_variant(row.variant, f);
    EXPECT_EQ(p.n, row.replicas_per_f * f + 1);
    EXPECT_EQ(p.completion, p.n - row.silent_per_f * f);
    EXPECT_EQ(p.fallback, row.fallback);
    EXPECT_EQ(p.quorum(), p.n - f);
    EXPECT_EQ(p.accuse_threshold(), f + 1);
    EXPECT_EQ(p.commit_threshold(), 2 * f + 1);
    EXPECT_EQ(p.inclusion_threshold(), p.uses_tmc() ? 1u : f + 1);
    EXPECT_NO_THROW(p.validate());
  }
}

INSTANTIATE_TEST_SUITE_P(Variants, VariantThresholds,
                         ::testing::Values(Row{Variant::SACZyzzyva, 3, 1, false},
                                           Row{Variant::Zyzzyva, 3, 0, true},
                                           Row{Variant::Zyzzyva5, 5, 1, false}));

TEST(Params, VariantNamesParse)
{
  for (auto v : {Variant::SACZyzzyva, Variant::Zyzzyva, Variant::Zyzzyva5})
    EXPECT_EQ(parse_variant(variant_name(v)), v);
  EXPECT_EQ(parse_variant("SACZYZZYVA"), Variant::SACZyzzyva);
  EXPECT_EQ(parse_variant("pbft"), std::nullopt);
}

TEST(Params, TooFewReplicas)
{
  auto p = ProtocolParams::for_variant(Variant::SACZyzzyva, 2);
  p.n = 6;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Params, CounterCountBounds)
{
  auto p = ProtocolParams::for_variant(Variant::SACZyzzyva, 2);
  p.n_tmc = 3; // f + 1 is enough
  EXPECT_NO_THROW(p.validate());
  p.n_tmc = 2;
  EXPECT_THROW(p.validate(), ConfigError);
  p.n_tmc = p.n + 1;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Params, PrimaryRotatesOverCounterHolders)
{
  auto p = ProtocolParams::for_variant(Variant::SACZyzzyva, 2);
  p.n_tmc = 3;
  for (View v = 0; v < 9; ++v)
  {
    EXPECT_EQ(p.primary(v), v % 3);
    EXPECT_TRUE(p.has_tmc(p.primary(v)));
  }
  EXPECT_FALSE(p.has_tmc(5));

  auto z = ProtocolParams::for_variant(Variant::Zyzzyva, 2);
  EXPECT_EQ(z.primary(8), 8 % 7);
  EXPECT_FALSE(z.has_tmc(0));
}

namespace {

sim::Scenario base()
{
  sim::Scenario s;
  s.params = ProtocolParams::for_variant(Variant::SACZyzzyva, 1);
  return s;
}

} // namespace

TEST(Scenario, FaultBudgetIsF)
{
  auto s = base();
  s.faults.push_back({3, sim::FaultKind::Crashed, 0, 0, {}});
  EXPECT_NO_THROW(s.validate());
  s.faults.push_back({2, sim::FaultKind::Crashed, 0, 0, {}});
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Scenario, OneFaultPerReplica)
{
  auto s = base();
  s.params = ProtocolParams::for_variant(Variant::SACZyzzyva, 2);
  s.faults.push_back({3, sim::FaultKind::Crashed, 0, 0, {}});
  s.faults.push_back({3, sim::FaultKind::Slow, 0, 5, {}});
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Scenario, RejectsBadFaults)
{
  auto s = base();
  s.faults.push_back({4, sim::FaultKind::Crashed, 0, 0, {}});
  EXPECT_THROW(s.validate(), ConfigError);

  s = base();
  s.faults.push_back({0, sim::FaultKind::Byzantine, 0, 0, {"no_such_script"}});
  EXPECT_THROW(s.validate(), ConfigError);

  s = base();
  s.params = ProtocolParams::for_variant(Variant::Zyzzyva, 1);
  s.faults.push_back({0, sim::FaultKind::TmcCrash, 10, 0, {}});
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Scenario, DelaysMustRespectTheBound)
{
  auto s = base();
  s.network.base_delay = 95;
  s.network.jitter = 10;
  EXPECT_THROW(s.validate(), ConfigError);

  s = base();
  s.network.regions = {{NodeId::replica(0), 0}, {NodeId::replica(1), 1}};
  s.network.region_delays = {{1, 120}, {120, 1}};
  EXPECT_THROW(s.validate(), ConfigError);
  s.network.region_delays = {{1, 50}, {50, 1}};
  EXPECT_NO_THROW(s.validate());
}

TEST(Scenario, PartitionWindowsMustBeOrdered)
{
  auto s = base();
  s.network.partitions.push_back({{{NodeId::replica(0)}}, 50, 10});
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Scenario, GstCoversPartitions)
{
  auto s = base();
  s.network.gst = 100;
  s.network.partitions.push_back({{{NodeId::replica(0)}}, 50, 700});
  EXPECT_EQ(s.network.effective_gst(), 700u);
}
