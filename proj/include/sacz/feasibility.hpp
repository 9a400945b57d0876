// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace sacz::feasibility {

/// Largest universe the exhaustive search accepts by default.
inline constexpr std::uint32_t default_bound = 12;

class BoundExceeded : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// n parties, b of which fail fully-Byzantine when they fail, tolerating f
/// failures in total.
struct HybridSystem
{
  std::uint32_t n = 0;
  std::uint32_t b = 0;
  std::uint32_t f = 0;

  /// Throws std::invalid_argument unless b <= n and f <= n.
  void validate() const;
};

using Parties = std::vector<std::uint32_t>; // sorted party indices, 0-based

/// Two quora whose intersection consists only of failed, fully-Byzantine
/// parties. Any protocol using them can be driven to decide two values.
struct Witness
{
  Parties q1;
  Parties q2;
  Parties failed;    // q1 ∩ q2, at most f parties
  Parties byzantine; // the placement of fully-Byzantine parties
};

struct Outcome
{
  bool feasible = true;
  std::optional<Witness> witness; // set iff !feasible
};

/// Closed form: n >= 3f+1 or n-b >= 2f+1.
bool is_feasible(const HybridSystem& sys);

/// Exhaustive search over threshold quora (every subset of at least n-f
/// parties). With no placement, every choice of b fully-Byzantine parties is
/// tried and the first witness wins.
Outcome brute_force(const HybridSystem& sys,
                    const std::optional<Parties>& byzantine = std::nullopt,
                    std::uint32_t bound = default_bound);

/// The explicit construction: Q1 = the first n-f parties, Q2 = the last n-f,
/// and the b fully-Byzantine parties placed contiguously around the middle.
/// Returns the witness when that placement breaks the system.
std::optional<Witness> contiguous_witness(const HybridSystem& sys);

struct RegionRow
{
  std::uint32_t n = 0;
  std::uint32_t b = 0;
  int max_f = -1; // -1 when no f is tolerable, not even zero
};

/// Every (n, b) with 0 <= b <= n <= max_n and the largest feasible f.
std::vector<RegionRow> region_table(std::uint32_t max_n,
                                    std::uint32_t bound = default_bound);

void write_region_csv(std::ostream& os, const std::vector<RegionRow>& rows);
void write_witness(std::ostream& os, const HybridSystem& sys, const Witness& w);

} // namespace sacz::feasibility
