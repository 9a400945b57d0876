// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
// if any fails.

#include "sacz/feasibility.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

using namespace sacz;
using namespace sacz::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Line
{
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& why)
  {
    if (!ok)
    {
      if (pass)
        detail << " | failed: ";
      else
        detail << "; ";
      detail << why;
    }
    pass = pass && ok;
  }
};

// Liveness across criteria 1-5, reported as criterion 6.
struct LivenessLedger
{
  std::size_t runs = 0;
  std::size_t stuck = 0;
  std::string first;

  void record(const std::string& label, const Transcript& t,
              const std::vector<Violation>& vs)
  {
    ++runs;
    const auto& end = t.records.back();
    bool live = count(vs, "liveness") == 0 &&
                end.value("completed", 0u) == end.value("submitted", 0u);
    if (!live && stuck++ == 0)
      first = label;
  }
};

LivenessLedger liveness;

struct Run
{
  Transcript transcript;
  harness::RunMetrics metrics;
  std::vector<Violation> violations;
  double seconds = 0;
};

Run execute(const sim::Scenario& s, const std::string& label)
{
  auto t0 = Clock::now();
  Run r;
  r.transcript = sim::run(s);
  r.seconds = seconds_since(t0);
  r.metrics = harness::metrics(r.transcript);
  r.violations = check_invariants(r.transcript);
  liveness.record(label, r.transcript, r.violations);
  return r;
}

void report(int id, const char* what, Line& line)
{
  std::printf("C%d %s %s:%s\n", id, line.pass ? "PASS" : "FAIL", what,
              line.detail.str().c_str());
  std::fflush(stdout);
}

bool resilience()
{
  Line line;
  double slowest = 0;
  for (std::uint32_t f = 1; f <= 3; ++f)
    for (auto v : {Variant::SACZyzzyva, Variant::Zyzzyva, Variant::Zyzzyva5})
    {
      auto s = scenario(v, f, 50, f);
      crash_backups(s, f);
      auto label = std::string(variant_name(v)) + " f=" + std::to_string(f);
      auto r = execute(s, label);
      const auto& m = r.metrics;
      slowest = std::max(slowest, r.seconds);
      line.require(m.completed == 50, label + " completed " + std::to_string(m.completed));
      if (v == Variant::Zyzzyva)
        line.require(m.fallbacks == 50, label + " fell back " + std::to_string(m.fallbacks));
      else
        line.require(m.fallbacks == 0, label + " fell back " + std::to_string(m.fallbacks));
      if (v == Variant::SACZyzzyva)
        line.require(m.view_changes == 0, label + " changed view");
      line.require(r.seconds < 10, label + " too slow");
    }
  line.detail << " f=1..3 with f crashed; saczyzzyva and zyzzyva5 50/50 without fallback,"
              << " zyzzyva 50/50 via fallback; slowest run " << slowest << " s";
  report(1, "resilience", line);
  return line.pass;
}

bool fault_free_messages()
{
  Line line;
  for (std::uint32_t f = 1; f <= 3; ++f)
  {
    std::map<Variant, std::vector<std::uint64_t>> per_request;
    for (auto v : {Variant::SACZyzzyva, Variant::Zyzzyva})
    {
      auto r = execute(scenario(v, f, 50, 10 + f), std::string(variant_name(v)) + " fault-free");
      for (const auto& q : r.metrics.requests)
        per_request[v].push_back(q.messages);
      auto n = r.metrics.n;
      line.require(per_request[v].size() == 50, "missing requests");
      for (auto c : per_request[v])
        line.require(c == 2 * n + 1, std::string(variant_name(v)) + " used " +
                                         std::to_string(c) + " messages with n=" +
                                         std::to_string(n));
    }
    line.require(per_request[Variant::SACZyzzyva] == per_request[Variant::Zyzzyva],
                 "per-request counts differ at f=" + std::to_string(f));
  }
  line.detail << " 50 requests, f=1..3: every request used 2n+1 messages in both variants";
  report(2, "fault-free message count", line);
  return line.pass;
}

bool extra_round_cost()
{
  Line line;
  std::map<Variant, Run> runs;
  for (auto v : {Variant::SACZyzzyva, Variant::Zyzzyva})
  {
    auto s = scenario(v, 1, 50, 3);
    s.network.jitter = 0;
    s.faults.push_back({s.params.n - 1, sim::FaultKind::Slow, 0, 1'000'000, {}});
    s.time_bound = 100'000'000;
    runs.emplace(v, execute(s, std::string(variant_name(v)) + " slow replica"));
  }
  const auto& sac = runs.at(Variant::SACZyzzyva);
  const auto& zyz = runs.at(Variant::Zyzzyva);
  auto params = ProtocolParams::for_variant(Variant::Zyzzyva, 1);
  const Time extra = params.client_timeout + 2 * sim::NetworkConfig{}.base_delay;

  long long min_gap = std::numeric_limits<long long>::max();
  line.require(sac.metrics.requests.size() == 50 && zyz.metrics.requests.size() == 50,
               "missing requests");
  for (std::size_t i = 0; i < std::min(sac.metrics.requests.size(), zyz.metrics.requests.size()); ++i)
  {
    const auto& a = sac.metrics.requests[i];
    const auto& b = zyz.metrics.requests[i];
    if (!a.latency || !b.latency)
    {
      line.require(false, "request " + std::to_string(i + 1) + " incomplete");
      continue;
    }
    auto gap = static_cast<long long>(*b.latency) - static_cast<long long>(*a.latency);
    line.require(*b.latency >= *a.latency + extra,
                 "request " + std::to_string(i + 1) + " gap " + std::to_string(gap));
    min_gap = std::min(min_gap, gap);
  }
  line.require(zyz.metrics.fallbacks == 50, "zyzzyva fell back on " +
                                                std::to_string(zyz.metrics.fallbacks) + "/50");
  line.require(sac.metrics.fallbacks == 0, "saczyzzyva fell back");
  line.detail << " smallest per-request latency gap " << min_gap << " >= T_client + 2d = "
              << extra << "; zyzzyva fallback 50/50, saczyzzyva 0/50";
  report(3, "extra-round cost", line);
  return line.pass;
}

bool adversarial_safety()
{
  static const std::vector<std::vector<std::string>> rotation{
    {"fuzz"},
    {"burn_counter"},
    {"drop_selective"},
    {"split_view_confirm"},
    {"stale_new_view"},
    {"equivocate"},
    {"fuzz", "truncate_view_change"},
    {"burn_counter", "drop_selective", "split_view_confirm", "stale_new_view"},
  };
  Line line;
  auto t0 = Clock::now();
  std::size_t prefix = 0, equivocation = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed)
  {
    std::uint32_t f = 1 + seed % 3;
    auto s = scenario(Variant::SACZyzzyva, f, 20, seed);
    for (ReplicaId r = 0; r < f; ++r)
      byzantine(s, r, rotation[(seed + r) % rotation.size()]);
    auto run = execute(s, "fuzz seed " + std::to_string(seed));
    prefix += count(run.violations, "prefix_safety");
    equivocation += count(run.violations, "non_equivocation");
  }
  auto secs = seconds_since(t0);
  line.require(prefix == 0, std::to_string(prefix) + " prefix-safety violations");
  line.require(equivocation == 0, std::to_string(equivocation) + " non-equivocation violations");
  line.require(secs < 300, "took too long");
  line.detail << " 200 seeds, f=1..3 Byzantine replicas starting with the primary; "
              << prefix << " prefix-safety, " << equivocation << " non-equivocation violations in "
              << secs << " s";
  report(4, "safety under adversarial schedules", line);
  return line.pass;
}

// Every completed request is an ancestor of the start of every later view,
// following the parent links correct replicas logged as they executed.
bool included_everywhere(const Transcript& t, std::string& why)
{
  std::map<std::string, std::string> parent;
  for (const auto& r : t.records)
    if (r.value("type", "") == "exec" && !r.value("byz", false))
      parent[r["digest"].get<std::string>()] = r["parent"].get<std::string>();

  auto reaches = [&](std::string from, const std::string& target) {
    for (std::size_t steps = 0; steps <= parent.size() + 1; ++steps)
    {
      if (from == target)
        return true;
      auto it = parent.find(from);
      if (it == parent.end())
        return false;
      from = it->second;
    }
    return false;
  };

  std::vector<std::pair<View, std::string>> completed;
  for (const auto& r : t.records)
  {
    auto type = r.value("type", "");
    if (type == "complete")
      completed.emplace_back(r["view"].get<View>(), r["digest"].get<std::string>());
    else if (type == "install" && !r.value("byz", false))
    {
      auto view = r["view"].get<View>();
      auto start = r["start_digest"].get<std::string>();
      for (const auto& [v, digest] : completed)
        if (view > v && !reaches(start, digest))
        {
          why = "view " + std::to_string(view) + " at r" +
                std::to_string(r["replica"].get<int>()) + " lost a completed request";
          return false;
        }
    }
  }
  return true;
}

bool view_change_inclusion()
{
  Line line;
  std::size_t min_changes = ~std::size_t{0}, completions = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed)
  {
    auto run = execute(two_view_changes(Variant::SACZyzzyva, seed),
                       "view changes seed " + std::to_string(seed));
    min_changes = std::min<std::size_t>(min_changes, run.metrics.view_changes);
    completions += run.metrics.completed;
    line.require(run.metrics.view_changes >= 2, "seed " + std::to_string(seed) + " had " +
                                                    std::to_string(run.metrics.view_changes) +
                                                    " view changes");
    std::string why;
    line.require(included_everywhere(run.transcript, why), "seed " + std::to_string(seed) + ": " + why);
    line.require(count(run.violations, "view_change_inclusion") == 0,
                 "checker flagged seed " + std::to_string(seed));
  }
  line.detail << " 50 seeds, at least " << min_changes << " view changes each; all "
              << completions << " completed requests found in every later installed history";
  report(5, "view-change inclusion", line);
  return line.pass;
}

bool liveness_everywhere()
{
  Line line;
  line.require(liveness.stuck == 0, std::to_string(liveness.stuck) + " runs stalled, first: " +
                                        liveness.first);
  line.detail << " " << liveness.runs << " runs from criteria 1-5, every request completed";
  report(6, "liveness", line);
  return line.pass;
}

bool feasibility_oracle()
{
  Line line;
  auto t0 = Clock::now();
  std::size_t points = 0, infeasible = 0;
  for (std::uint32_t n = 0; n <= 9; ++n)
    for (std::uint32_t b = 0; b <= n; ++b)
      for (std::uint32_t f = 0; f <= n; ++f)
      {
        feasibility::HybridSystem sys{n, b, f};
        bool closed = feasibility::is_feasible(sys);
        bool brute = feasibility::brute_force(sys).feasible;
        ++points;
        infeasible += !brute;
        line.require(closed == brute, "mismatch at n=" + std::to_string(n) + " b=" +
                                          std::to_string(b) + " f=" + std::to_string(f));
      }
  auto secs = seconds_since(t0);
  line.require(secs < 60, "took too long");
  line.detail << " " << points << " (n,b,f) points with n<=9 agree (" << infeasible
              << " infeasible) in " << secs << " s";
  report(7, "feasibility oracle equivalence", line);
  return line.pass;
}

bool checkpoint_gc()
{
  Line line;
  auto s = scenario(Variant::SACZyzzyva, 1, 25, 5);
  s.params.checkpoint_interval = 10;
  sim::Simulation sim(s);
  sim.run();
  const auto& t = sim.transcript();

  std::set<std::uint64_t> stable;
  for (const auto& r : t.records)
    if (r.value("type", "") == "checkpoint_stable")
    {
      stable.insert(r["position"].get<std::uint64_t>());
      line.require(r["retained"].get<std::size_t>() == 0,
                   "r" + std::to_string(r["replica"].get<int>()) + " kept order-requests");
    }
  line.require(stable.size() == 2, std::to_string(stable.size()) + " stable checkpoints");
  std::size_t held = 0;
  for (ReplicaId r = 0; r < s.params.n; ++r)
    held += sim.replica(r).retained_at_or_below(sim.replica(r).stable_position());
  line.require(held == 0, std::to_string(held) + " order-requests held below the checkpoint");
  line.detail << " 25 requests, N=10: " << stable.size() << " stable checkpoints, "
              << held << " order-requests retained at or below them";
  report(8, "checkpoint garbage collection", line);
  return line.pass;
}

bool mutation_detected()
{
  Line line;
  std::size_t flagged = 0;
  std::uint64_t first = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed)
  {
    auto s = scenario(Variant::SACZyzzyva, 1, 20, seed);
    s.params.completion = s.params.f + 1;
    byzantine(s, 0, {"drop_selective", "truncate_view_change"});
    auto t = sim::run(s);
    auto vs = check_invariants(t);
    bool unsafe = std::any_of(vs.begin(), vs.end(), is_safety_violation);
    if (unsafe && flagged++ == 0)
      first = seed;
  }
  line.require(flagged > 0, "never flagged");
  line.detail << " completion threshold lowered to f+1: safety violations on " << flagged
              << "/200 seeds, first at seed " << first;
  report(9, "mutation detection", line);
  return line.pass;
}

} // namespace

int main()
{
  std::vector<std::function<bool()>> criteria{
    resilience,         fault_free_messages, extra_round_cost,
    adversarial_safety, view_change_inclusion, liveness_everywhere,
    feasibility_oracle, checkpoint_gc,        mutation_detected,
  };
  bool all = true;
  for (auto& c : criteria)
    all = c() && all;
  return all ? 0 : 1;
}
