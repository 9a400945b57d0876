// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "sacz/feasibility.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <bit>
#include <sstream>

using namespace sacz::feasibility;

namespace {

// Oracle 1: two quora of at least n-f parties can meet in exactly k parties
// for every k from max(0, n-2f) to n-f. A breaking intersection also needs
// k <= f failures, all of them among the b fully-Byzantine parties.
bool broken_by_counting(std::uint32_t n, std::uint32_t b, std::uint32_t f)
{
  std::int64_t lo = std::max<std::int64_t>(0, std::int64_t(n) - 2 * std::int64_t(f));
  std::int64_t hi = std::min<std::int64_t>({f, b, n - f});
  return lo <= hi;
}

// Oracle 2: literal enumeration of every pair of quora of every size and
// every placement. Exponential, so only for small n.
bool broken_by_enumeration(std::uint32_t n, std::uint32_t b, std::uint32_t f)
{
  const std::uint32_t all = 1u << n;
  for (std::uint32_t byz = 0; byz < all; ++byz)
  {
    if (std::uint32_t(std::popcount(byz)) != b)
      continue;
    for (std::uint32_t q1 = 0; q1 < all; ++q1)
    {
      if (std::uint32_t(std::popcount(q1)) + f < n)
        continue;
      for (std::uint32_t q2 = 0; q2 < all; ++q2)
      {
        if (std::uint32_t(std::popcount(q2)) + f < n)
          continue;
        auto both = q1 & q2;
        if (std::uint32_t(std::popcount(both)) <= f && (both & ~byz) == 0)
          return true;
      }
    }
  }
  return false;
}

void expect_valid_witness(const HybridSystem& sys, const Witness& w)
{
  EXPECT_GE(w.q1.size() + sys.f, sys.n);
  EXPECT_GE(w.q2.size() + sys.f, sys.n);
  EXPECT_EQ(w.byzantine.size(), sys.b);
  EXPECT_LE(w.failed.size(), sys.f);
  Parties both;
  std::set_intersection(w.q1.begin(), w.q1.end(), w.q2.begin(), w.q2.end(),
                        std::back_inserter(both));
  EXPECT_EQ(both, w.failed);
  EXPECT_TRUE(std::includes(w.byzantine.begin(), w.byzantine.end(), w.failed.begin(),
                            w.failed.end()));
  for (auto p : w.q1)
    EXPECT_LT(p, sys.n);
  for (auto p : w.q2)
    EXPECT_LT(p, sys.n);
}

} // namespace

TEST(ClosedForm, Examples)
{
  EXPECT_TRUE(is_feasible({4, 4, 1}));  // 3f+1 replicas, all may be fully Byzantine
  EXPECT_FALSE(is_feasible({3, 1, 1})); // 3 < 4 and 2 < 3
  EXPECT_TRUE(is_feasible({3, 0, 1}));  // 2f+1 parties that never equivocate
  EXPECT_TRUE(is_feasible({1, 1, 0}));
}

// With no parties, two empty quora meet in nothing, and the closed form says
// neither inequality holds. The vacuous reading would call this feasible.
TEST(ClosedForm, EmptySystemFollowsTheInequalities)
{
  EXPECT_FALSE(is_feasible({0, 0, 0}));
  EXPECT_FALSE(brute_force({0, 0, 0}).feasible);
}

TEST(ClosedForm, RejectsOutOfRange)
{
  EXPECT_THROW(is_feasible({3, 4, 1}), std::invalid_argument);
  EXPECT_THROW(is_feasible({3, 1, 4}), std::invalid_argument);
}

TEST(BruteForce, Examples)
{
  auto all_byz = brute_force({4, 4, 1});
  EXPECT_TRUE(all_byz.feasible);
  EXPECT_FALSE(all_byz.witness);

  auto three = brute_force({3, 3, 1});
  ASSERT_FALSE(three.feasible);
  ASSERT_TRUE(three.witness);
  EXPECT_EQ(three.witness->failed.size(), 1u);
  expect_valid_witness({3, 3, 1}, *three.witness);

  EXPECT_TRUE(brute_force({3, 0, 1}).feasible);
}

TEST(BruteForce, AgreesWithCountingOracle)
{
  for (std::uint32_t n = 0; n <= 9; ++n)
    for (std::uint32_t b = 0; b <= n; ++b)
      for (std::uint32_t f = 0; f <= n; ++f)
      {
        HybridSystem sys{n, b, f};
        auto out = brute_force(sys);
        bool broken = broken_by_counting(n, b, f);
        EXPECT_EQ(out.feasible, !broken) << n << ' ' << b << ' ' << f;
        EXPECT_EQ(is_feasible(sys), !broken) << n << ' ' << b << ' ' << f;
        EXPECT_EQ(out.witness.has_value(), broken);
        if (out.witness)
          expect_valid_witness(sys, *out.witness);
      }
}

TEST(BruteForce, AgreesWithLiteralEnumeration)
{
  for (std::uint32_t n = 0; n <= 6; ++n)
    for (std::uint32_t b = 0; b <= n; ++b)
      for (std::uint32_t f = 0; f <= n; ++f)
        EXPECT_EQ(brute_force({n, b, f}).feasible, !broken_by_enumeration(n, b, f))
          << n << ' ' << b << ' ' << f;
}

// Threshold quora are symmetric, so every placement is as bad as the worst.
TEST(BruteForce, EveryPlacementMatchesWorstCase)
{
  for (std::uint32_t n = 1; n <= 6; ++n)
    for (std::uint32_t b = 0; b <= n; ++b)
      for (std::uint32_t f = 0; f <= n; ++f)
      {
        bool worst = brute_force({n, b, f}).feasible;
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask)
        {
          if (std::uint32_t(std::popcount(mask)) != b)
            continue;
          Parties placement;
          for (std::uint32_t i = 0; i < n; ++i)
            if (mask >> i & 1)
              placement.push_back(i);
          auto out = brute_force({n, b, f}, placement);
          EXPECT_EQ(out.feasible, worst);
          if (out.witness)
            EXPECT_EQ(out.witness->byzantine, placement);
        }
      }
}

TEST(BruteForce, RejectsBadPlacements)
{
  EXPECT_THROW(brute_force({4, 2, 1}, Parties{0}), std::invalid_argument);
  EXPECT_THROW(brute_force({4, 2, 1}, Parties{0, 0}), std::invalid_argument);
  EXPECT_THROW(brute_force({4, 1, 1}, Parties{4}), std::invalid_argument);
}

TEST(BruteForce, Bound)
{
  EXPECT_NO_THROW(brute_force({12, 0, 3}));
  EXPECT_THROW(brute_force({13, 0, 4}), BoundExceeded);
  EXPECT_THROW(brute_force({8, 0, 2}, std::nullopt, 7), BoundExceeded);
}

TEST(Monotonicity, MoreReplicasFewerByzantineFewerFaults)
{
  for (std::uint32_t n = 0; n <= 12; ++n)
    for (std::uint32_t b = 0; b <= n; ++b)
      for (std::uint32_t f = 0; f <= n; ++f)
      {
        if (!is_feasible({n, b, f}))
          continue;
        EXPECT_TRUE(is_feasible({n + 1, b, f}));
        if (b > 0)
          EXPECT_TRUE(is_feasible({n, b - 1, f}));
        if (f > 0)
          EXPECT_TRUE(is_feasible({n, b, f - 1}));
      }
}

TEST(Contiguous, MatchesExhaustiveSearch)
{
  for (std::uint32_t n = 0; n <= 12; ++n)
    for (std::uint32_t b = 0; b <= n; ++b)
      for (std::uint32_t f = 0; f <= n; ++f)
      {
        HybridSystem sys{n, b, f};
        auto w = contiguous_witness(sys);
        EXPECT_EQ(w.has_value(), !is_feasible(sys)) << n << ' ' << b << ' ' << f;
        if (w)
          expect_valid_witness(sys, *w);
      }
}

TEST(Contiguous, ShapeOfTheConstruction)
{
  // n=6, f=2, b=2: Q1 = first four, Q2 = last four, Byzantine pair in the middle.
  auto w = contiguous_witness({6, 2, 2});
  ASSERT_TRUE(w);
  EXPECT_EQ(w->q1, (Parties{0, 1, 2, 3}));
  EXPECT_EQ(w->q2, (Parties{2, 3, 4, 5}));
  EXPECT_EQ(w->byzantine, (Parties{2, 3}));
  EXPECT_EQ(w->failed, (Parties{2, 3}));
}

TEST(Region, KnownRows)
{
  auto rows = region_table(9);
  auto at = [&](std::uint32_t n, std::uint32_t b) {
    for (const auto& r : rows)
      if (r.n == n && r.b == b)
        return r.max_f;
    ADD_FAILURE() << "missing row " << n << ',' << b;
    return -2;
  };
  EXPECT_EQ(at(4, 0), 1);
  EXPECT_EQ(at(3, 0), 1);
  EXPECT_EQ(at(2, 2), 0);
  EXPECT_EQ(at(0, 0), -1);
  EXPECT_EQ(at(9, 9), 2);
  EXPECT_EQ(at(9, 0), 4);
  EXPECT_EQ(rows.size(), 55u); // sum over n of (n + 1)
  for (const auto& r : rows)
  {
    if (r.max_f >= 0)
      EXPECT_TRUE(is_feasible({r.n, r.b, std::uint32_t(r.max_f)}));
    if (std::uint32_t(r.max_f + 1) <= r.n)
      EXPECT_FALSE(is_feasible({r.n, r.b, std::uint32_t(r.max_f + 1)}));
  }
  EXPECT_THROW(region_table(13), BoundExceeded);
}

TEST(Region, CsvShape)
{
  std::ostringstream os;
  write_region_csv(os, region_table(2));
  EXPECT_EQ(os.str(), "n,b,max_f\n0,0,-1\n1,0,0\n1,1,0\n2,0,0\n2,1,0\n2,2,0\n");
}

TEST(Witness, TextOutput)
{
  std::ostringstream os;
  write_witness(os, {3, 3, 1}, *brute_force({3, 3, 1}).witness);
  EXPECT_NE(os.str().find("system: n=3 b=3 f=1"), std::string::npos);
  EXPECT_NE(os.str().find("failed: {"), std::string::npos);
}

// Toy vote in the witness configuration. Each quorum decides a value when
// every member reports it. A fully-Byzantine party can tell the two quora
// different things; a party whose votes are bound to one trusted counter
// value per slot cannot.
namespace {

enum Value
{
  M,
  M_PRIME
};

// votes[p][q]: what party p reports to quorum q (0 or 1).
bool conflicting_decisions(const Witness& w, const std::vector<std::array<Value, 2>>& votes)
{
  auto decides = [&](const Parties& q, int which, Value v) {
    return std::all_of(q.begin(), q.end(), [&](auto p) { return votes[p][which] == v; });
  };
  return (decides(w.q1, 0, M) && decides(w.q2, 1, M_PRIME)) ||
         (decides(w.q1, 0, M_PRIME) && decides(w.q2, 1, M));
}

} // namespace

TEST(Lemma, ByzantineIntersectionSplitsTheQuora)
{
  HybridSystem sys{3, 3, 1};
  auto w = *brute_force(sys).witness;
  std::vector<std::array<Value, 2>> votes(sys.n, {M, M});
  for (auto p : w.q2)
    votes[p] = {M_PRIME, M_PRIME};
  for (auto p : w.failed)
    votes[p] = {M, M_PRIME}; // equivocates
  EXPECT_TRUE(conflicting_decisions(w, votes));
}

TEST(Lemma, NonEquivocatingIntersectionCannot)
{
  HybridSystem sys{3, 3, 1};
  auto w = *brute_force(sys).witness;
  // Every party casts one value seen identically by both quora.
  for (std::uint32_t assignment = 0; assignment < (1u << sys.n); ++assignment)
  {
    std::vector<std::array<Value, 2>> votes(sys.n);
    for (std::uint32_t p = 0; p < sys.n; ++p)
    {
      Value v = (assignment >> p & 1) ? M_PRIME : M;
      votes[p] = {v, v};
    }
    EXPECT_FALSE(conflicting_decisions(w, votes)) << "assignment " << assignment;
  }
}
