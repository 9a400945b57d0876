// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "sacz/feasibility.hpp"

#include <bit>
#include <set>
#include <string>

namespace sacz::feasibility {

namespace {

using Mask = std::uint32_t;

Parties to_parties(Mask m)
{
  Parties out;
  for (std::uint32_t i = 0; m; ++i, m >>= 1)
    if (m & 1)
      out.push_back(i);
  return out;
}

std::vector<Mask> subsets_of_size(std::uint32_t n, std::uint32_t k)
{
  std::vector<Mask> out;
  for (Mask m = 0; m < (Mask{1} << n); ++m)
    if (std::uint32_t(std::popcount(m)) == k)
      out.push_back(m);
  return out;
}

// A superset of a quorum only grows its intersections, so if any pair of
// quora breaks the placement, a pair of smallest quora does too.
std::optional<Witness> search(const std::vector<Mask>& quora, Mask byz, std::uint32_t f)
{
  for (Mask q1 : quora)
    for (Mask q2 : quora)
    {
      Mask both = q1 & q2;
      if (std::uint32_t(std::popcount(both)) <= f && (both & ~byz) == 0)
        return Witness{to_parties(q1), to_parties(q2), to_parties(both), to_parties(byz)};
    }
  return std::nullopt;
}

Mask range_mask(std::uint32_t first, std::uint32_t last) // 1-based, inclusive
{
  Mask m = 0;
  for (auto i = first; i <= last; ++i)
    m |= Mask{1} << (i - 1);
  return m;
}

void write_set(std::ostream& os, const char* label, const Parties& p)
{
  os << label << ": {";
  for (std::size_t i = 0; i < p.size(); ++i)
    os << (i ? ", " : "") << p[i];
  os << "}\n";
}

} // namespace

void HybridSystem::validate() const
{
  if (b > n || f > n)
    throw std::invalid_argument("need b <= n and f <= n, got n=" + std::to_string(n) +
                                " b=" + std::to_string(b) + " f=" + std::to_string(f));
}

bool is_feasible(const HybridSystem& sys)
{
  sys.validate();
  return sys.n >= 3 * sys.f + 1 || sys.n - sys.b >= 2 * sys.f + 1;
}

Outcome brute_force(const HybridSystem& sys, const std::optional<Parties>& byzantine,
                    std::uint32_t bound)
{
  sys.validate();
  if (sys.n > bound || sys.n > 31)
    throw BoundExceeded("exhaustive search limited to n <= " + std::to_string(bound));

  auto quora = subsets_of_size(sys.n, sys.n - sys.f);

  if (byzantine)
  {
    Mask byz = 0;
    for (auto p : *byzantine)
    {
      if (p >= sys.n || (byz >> p) & 1)
        throw std::invalid_argument("placement must name distinct parties below n");
      byz |= Mask{1} << p;
    }
    if (byzantine->size() != sys.b)
      throw std::invalid_argument("placement must name exactly b parties");
    auto w = search(quora, byz, sys.f);
    return {!w, std::move(w)};
  }

  for (Mask byz : subsets_of_size(sys.n, sys.b))
    if (auto w = search(quora, byz, sys.f))
      return {false, std::move(w)};
  return {true, std::nullopt};
}

std::optional<Witness> contiguous_witness(const HybridSystem& sys)
{
  sys.validate();
  const auto n = sys.n, b = sys.b, f = sys.f;
  if (n > 31)
    throw BoundExceeded("witness construction limited to n <= 31");

  Mask q1 = range_mask(1, n - f);
  Mask q2 = range_mask(f + 1, n);
  Mask byz = range_mask(n / 2 - b / 2 + 1, n / 2 + (b + 1) / 2);
  Mask both = q1 & q2;
  if (std::uint32_t(std::popcount(both)) > f || (both & ~byz) != 0)
    return std::nullopt;
  return Witness{to_parties(q1), to_parties(q2), to_parties(both), to_parties(byz)};
}

std::vector<RegionRow> region_table(std::uint32_t max_n, std::uint32_t bound)
{
  if (max_n > bound)
    throw BoundExceeded("region table limited to n <= " + std::to_string(bound));
  std::vector<RegionRow> rows;
  for (std::uint32_t n = 0; n <= max_n; ++n)
    for (std::uint32_t b = 0; b <= n; ++b)
    {
      RegionRow row{n, b, -1};
      for (std::uint32_t f = 0; f <= n; ++f)
        if (is_feasible({n, b, f}))
          row.max_f = int(f);
      rows.push_back(row);
    }
  return rows;
}

void write_region_csv(std::ostream& os, const std::vector<RegionRow>& rows)
{
  os << "n,b,max_f\n";
  for (const auto& r : rows)
    os << r.n << ',' << r.b << ',' << r.max_f << '\n';
}

void write_witness(std::ostream& os, const HybridSystem& sys, const Witness& w)
{
  os << "system: n=" << sys.n << " b=" << sys.b << " f=" << sys.f << '\n';
  write_set(os, "q1", w.q1);
  write_set(os, "q2", w.q2);
  write_set(os, "failed", w.failed);
  write_set(os, "byzantine", w.byzantine);
}

} // namespace sacz::feasibility
