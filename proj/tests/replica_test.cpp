// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "support.hpp"

#include <gtest/gtest.h>

using namespace sacz;
using namespace sacz::testing;

namespace {

void expect_clean(const Transcript& t, std::uint64_t requests)
{
  EXPECT_EQ(t.records.back()["completed"], requests);
  for (const auto& v : check_invariants(t))
    ADD_FAILURE() << v.invariant << ": " << v.detail;
}

} // namespace

class EveryVariant : public ::testing::TestWithParam<Variant>
{};

TEST_P(EveryVariant, CorrectReplicasAgree)
{
  sim::Simulation sim(scenario(GetParam(), 1, 12, 3));
  sim.run();
  expect_clean(sim.transcript(), 12);
  const auto& head = sim.replica(0).state().head();
  for (ReplicaId r = 1; r < sim.scenario().params.n; ++r)
  {
    EXPECT_EQ(sim.replica(r).state().head(), head);
    EXPECT_EQ(sim.replica(r).view(), 0u);
  }
}

TEST_P(EveryVariant, PrimaryCrashForcesViewChange)
{
  auto s = scenario(GetParam(), 1, 6, 2);
  s.faults.push_back({0, sim::FaultKind::Crashed, 0, 0, {}});
  sim::Simulation sim(s);
  sim.run();
  expect_clean(sim.transcript(), 6);
  for (ReplicaId r = 1; r < s.params.n; ++r)
    EXPECT_GE(sim.replica(r).view(), 1u);
}

INSTANTIATE_TEST_SUITE_P(Variants, EveryVariant,
                         ::testing::Values(Variant::SACZyzzyva, Variant::Zyzzyva,
                                           Variant::Zyzzyva5),
                         [](const auto& info) { return std::string(variant_name(info.param)); });

TEST(Replica, CounterCrashOnPrimaryForcesViewChange)
{
  auto s = scenario(Variant::SACZyzzyva, 1, 6, 2);
  s.faults.push_back({0, sim::FaultKind::TmcCrash, 50, 0, {}});
  sim::Simulation sim(s);
  sim.run();
  expect_clean(sim.transcript(), 6);
  EXPECT_GE(sim.replica(2).view(), 1u);
}

TEST(Replica, NewViewUsesAFreshCounterInstance)
{
  auto s = scenario(Variant::SACZyzzyva, 1, 6, 2);
  s.faults.push_back({0, sim::FaultKind::Crashed, 0, 0, {}});
  sim::Simulation sim(s);
  sim.run();
  const auto& cert = sim.replica(2).view_certificate();
  EXPECT_GE(cert.view, 1u);
  EXPECT_NE(sim.replica(2).counter_key(), sim.replica(2).validator().counter_key(sim.system().genesis.view0));
}

TEST(Replica, CheckpointsBecomeStable)
{
  auto s = scenario(Variant::SACZyzzyva, 1, 25, 5);
  s.params.checkpoint_interval = 10;
  sim::Simulation sim(s);
  sim.run();
  for (ReplicaId r = 0; r < s.params.n; ++r)
  {
    EXPECT_EQ(sim.replica(r).stable_position(), 20u);
    EXPECT_EQ(sim.replica(r).retained_at_or_below(20), 0u);
    EXPECT_GT(sim.replica(r).log().size(), 0u);
  }
}

TEST(Replica, ZyzzyvaFallsBackWithOneSilentBackup)
{
  auto s = scenario(Variant::Zyzzyva, 1, 5, 3);
  crash_backups(s, 1);
  auto t = sim::run(s);
  expect_clean(t, 5);
  std::size_t fallbacks = 0;
  for (const auto& r : t.records)
    if (r.value("type", "") == "complete")
    {
      EXPECT_GE(r["matching"].get<std::size_t>(), 3u);
      fallbacks += r["fallback"].get<bool>();
    }
  EXPECT_EQ(fallbacks, 5u);
  EXPECT_GT(count_type(t, "send"), 0u);
}

TEST(Replica, SacNeedsNoFallbackWithOneSilentBackup)
{
  auto s = scenario(Variant::SACZyzzyva, 1, 5, 3);
  crash_backups(s, 1);
  auto m = harness::metrics(sim::run(s));
  EXPECT_EQ(m.completed, 5u);
  EXPECT_EQ(m.fallbacks, 0u);
  EXPECT_EQ(m.view_changes, 0u);
}

TEST(Replica, EquivocatingBaselinePrimaryIsExposed)
{
  std::size_t proofs = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed)
  {
    // A second client gives the primary a live request to swap in.
    auto s = scenario(Variant::Zyzzyva, 1, 10, seed);
    s.workload.clients = 2;
    byzantine(s, 0, {"equivocate"});
    auto t = sim::run(s);
    for (const auto& v : check_invariants(t))
      ADD_FAILURE() << "seed " << seed << " " << v.invariant << ": " << v.detail;
    for (const auto& r : t.records)
      proofs += r.value("type", "") == "send" && r["kind"] == "PROOF-OF-MISBEHAVIOR";
  }
  EXPECT_GT(proofs, 0u);
}

TEST(Replica, EquivocationCannotReachSacBackups)
{
  for (std::uint64_t seed = 1; seed <= 10; ++seed)
  {
    auto s = scenario(Variant::SACZyzzyva, 1, 10, seed);
    s.workload.clients = 2;
    byzantine(s, 0, {"equivocate"});
    auto t = sim::run(s);
    EXPECT_TRUE(check_invariants(t).empty()) << "seed " << seed;
  }
}

TEST(Client, BacksOffWhileCutOff)
{
  auto s = scenario(Variant::SACZyzzyva, 1, 1);
  s.network.partitions.push_back({{{NodeId::client(0)}}, 0, 1000});
  sim::Simulation sim(s);
  sim.start();
  sim.run_until(500);
  EXPECT_FALSE(sim.client(0).idle());
  EXPECT_GE(sim.client(0).current_timeout(), 4 * s.params.client_timeout);
  sim.run();
  EXPECT_TRUE(sim.client(0).idle());
  EXPECT_TRUE(check_invariants(sim.transcript()).empty());
}

TEST(Client, LearnsTheViewFromReplies)
{
  auto s = scenario(Variant::SACZyzzyva, 1, 4, 2);
  s.faults.push_back({0, sim::FaultKind::Crashed, 0, 0, {}});
  sim::Simulation sim(s);
  sim.run();
  EXPECT_GE(sim.client(0).believed_view(), 1u);
  ASSERT_TRUE(sim.client(0).last_completion());
  EXPECT_EQ(sim.client(0).last_completion()->id, 4u);
}
