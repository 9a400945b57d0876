// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "sacz/harness.hpp"

#include "sacz/simnet.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace sacz::harness {

using sim::Fault;
using sim::FaultKind;
using sim::Scenario;

namespace {

[[noreturn]] void fail(const YAML::Node& at, const std::string& what)
{
  auto mark = at.Mark();
  if (mark.is_null())
    throw ConfigError(what);
  throw ConfigError("line " + std::to_string(mark.line + 1) + ": " + what);
}

void only_keys(const YAML::Node& map, std::initializer_list<std::string_view> allowed,
               const std::string& where)
{
  if (!map.IsMap())
    fail(map, where + " must be a mapping");
  for (const auto& kv : map)
  {
    auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      fail(kv.first, "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& key)
{
  try
  {
    return n.as<T>();
  }
  catch (const YAML::Exception&)
  {
    fail(n, "bad value for '" + key + "'");
  }
}

template <typename T>
void maybe(const YAML::Node& map, const char* key, T& out)
{
  if (auto n = map[key])
    out = scalar<T>(n, key);
}

NodeId parse_node(const YAML::Node& n)
{
  auto s = scalar<std::string>(n, "node");
  if (s.size() >= 2 && (s[0] == 'r' || s[0] == 'c') &&
      std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
  {
    auto index = static_cast<std::uint32_t>(std::stoul(s.substr(1)));
    return s[0] == 'r' ? NodeId::replica(index) : NodeId::client(index);
  }
  fail(n, "node names look like r0 or c0, got '" + s + "'");
}

FaultKind parse_fault_kind(const YAML::Node& n)
{
  auto s = scalar<std::string>(n, "kind");
  if (s == "crashed" || s == "crash")
    return FaultKind::Crashed;
  if (s == "slow")
    return FaultKind::Slow;
  if (s == "byzantine" || s == "byzantine_full" || s == "byzantine_partial")
    return FaultKind::Byzantine;
  if (s == "tmc_crash")
    return FaultKind::TmcCrash;
  fail(n, "unknown fault kind '" + s + "'");
}

sim::NetworkConfig parse_network(const YAML::Node& doc)
{
  only_keys(doc,
            {"base_delay", "jitter", "gst", "bound", "pre_gst_extra", "regions",
             "region_delays", "links", "partitions"},
            "network");
  sim::NetworkConfig net;
  maybe(doc, "base_delay", net.base_delay);
  maybe(doc, "jitter", net.jitter);
  maybe(doc, "gst", net.gst);
  maybe(doc, "bound", net.bound);
  maybe(doc, "pre_gst_extra", net.pre_gst_extra);
  if (auto regions = doc["regions"])
  {
    if (!regions.IsMap())
      fail(regions, "regions maps node names to region indices");
    for (const auto& kv : regions)
      net.regions.emplace_back(parse_node(kv.first), scalar<std::uint32_t>(kv.second, "regions"));
  }
  if (auto matrix = doc["region_delays"])
    for (const auto& row : matrix)
    {
      std::vector<Time> r;
      for (const auto& x : row)
        r.push_back(scalar<Time>(x, "region_delays"));
      net.region_delays.push_back(std::move(r));
    }
  if (auto links = doc["links"])
    for (const auto& l : links)
    {
      only_keys(l, {"from", "to", "delay"}, "link");
      if (!l["from"] || !l["to"] || !l["delay"])
        fail(l, "a link needs from, to and delay");
      net.links.push_back({parse_node(l["from"]), parse_node(l["to"]),
                           scalar<Time>(l["delay"], "delay")});
    }
  if (auto parts = doc["partitions"])
    for (const auto& p : parts)
    {
      only_keys(p, {"groups", "from", "to"}, "partition");
      sim::Partition part;
      for (const auto& g : p["groups"])
      {
        std::vector<NodeId> group;
        for (const auto& node : g)
          group.push_back(parse_node(node));
        part.groups.push_back(std::move(group));
      }
      maybe(p, "from", part.from);
      maybe(p, "to", part.to);
      net.partitions.push_back(std::move(part));
    }
  return net;
}

Fault parse_fault(const YAML::Node& doc)
{
  only_keys(doc, {"replica", "kind", "at", "extra", "scripts"}, "fault");
  if (!doc["replica"] || !doc["kind"])
    fail(doc, "a fault needs replica and kind");
  Fault f;
  f.replica = scalar<ReplicaId>(doc["replica"], "replica");
  f.kind = parse_fault_kind(doc["kind"]);
  maybe(doc, "at", f.at);
  maybe(doc, "extra", f.extra);
  if (auto scripts = doc["scripts"])
  {
    if (scripts.IsScalar())
      f.scripts.push_back(scripts.as<std::string>());
    else
      for (const auto& s : scripts)
        f.scripts.push_back(scalar<std::string>(s, "scripts"));
  }
  if (f.kind == FaultKind::Byzantine && f.scripts.empty())
    fail(doc, "a byzantine fault needs at least one script");
  return f;
}

// Dotted-path assignment into a scenario document, creating maps on the way.
void assign(YAML::Node doc, const std::string& path, const std::string& value)
{
  auto dot = path.find('.');
  if (dot == std::string::npos)
  {
    doc[path] = YAML::Load(value);
    return;
  }
  auto head = path.substr(0, dot);
  if (!doc[head])
    doc[head] = YAML::Node(YAML::NodeType::Map);
  assign(doc[head], path.substr(dot + 1), value);
}

std::optional<double> median(std::vector<double> xs)
{
  if (xs.empty())
    return std::nullopt;
  std::sort(xs.begin(), xs.end());
  auto mid = xs.size() / 2;
  return xs.size() % 2 ? xs[mid] : (xs[mid - 1] + xs[mid]) / 2;
}

template <typename T>
std::string opt(const std::optional<T>& v)
{
  if (!v)
    return "";
  std::ostringstream os;
  os << *v;
  return os.str();
}

} // namespace

Scenario load_scenario(const YAML::Node& doc)
{
  only_keys(doc,
            {"name", "variant", "f", "n", "n_tmc", "completion", "checkpoint_interval",
             "watermark_windows", "timeouts", "seed", "time_bound", "scheme", "network",
             "faults", "workload"},
            "scenario");
  if (!doc["variant"])
    fail(doc, "scenario needs a variant");
  auto vname = scalar<std::string>(doc["variant"], "variant");
  auto variant = parse_variant(vname);
  if (!variant)
    fail(doc["variant"], "unknown variant '" + vname + "'");

  Scenario s;
  std::uint32_t f = 1;
  maybe(doc, "f", f);
  s.params = ProtocolParams::for_variant(*variant, f);
  maybe(doc, "name", s.name);
  if (auto n = doc["n"])
  {
    s.params.n = scalar<std::uint32_t>(n, "n");
    if (s.params.uses_tmc() && !doc["n_tmc"])
      s.params.n_tmc = s.params.n;
  }
  maybe(doc, "n_tmc", s.params.n_tmc);
  maybe(doc, "completion", s.params.completion);
  maybe(doc, "checkpoint_interval", s.params.checkpoint_interval);
  maybe(doc, "watermark_windows", s.params.watermark_windows);
  if (auto t = doc["timeouts"])
  {
    only_keys(t, {"replica", "client"}, "timeouts");
    maybe(t, "replica", s.params.replica_timeout);
    maybe(t, "client", s.params.client_timeout);
  }
  maybe(doc, "seed", s.seed);
  maybe(doc, "time_bound", s.time_bound);
  if (auto scheme = doc["scheme"])
  {
    auto name = scalar<std::string>(scheme, "scheme");
    if (name == "simulated")
      s.scheme = crypto::Scheme::Simulated;
    else if (name == "ed25519")
      s.scheme = crypto::Scheme::Ed25519;
    else
      fail(scheme, "scheme is simulated or ed25519");
  }
  if (auto net = doc["network"])
    s.network = parse_network(net);
  if (auto faults = doc["faults"])
    for (const auto& fault : faults)
      s.faults.push_back(parse_fault(fault));
  if (auto w = doc["workload"])
  {
    only_keys(w, {"clients", "requests"}, "workload");
    maybe(w, "clients", s.workload.clients);
    maybe(w, "requests", s.workload.requests);
  }
  s.validate();
  return s;
}

Scenario parse_scenario(const std::string& yaml)
{
  YAML::Node doc;
  try
  {
    doc = YAML::Load(yaml);
  }
  catch (const YAML::Exception& e)
  {
    throw ConfigError(std::string("malformed YAML: ") + e.what());
  }
  return load_scenario(doc);
}

Scenario load_scenario_file(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

RunMetrics metrics(const Transcript& t)
{
  const auto& h = t.header();
  RunMetrics m;
  m.scenario = h.value("name", "");
  m.variant = h.value("variant", "");
  m.f = h.value("f", 0u);
  m.n = h.value("n", 0u);
  m.seed = h.value("seed", std::uint64_t{0});

  std::map<RequestKey, RequestMetrics> reqs;
  std::set<View> views;
  for (const auto& r : t.records)
  {
    auto type = r.value("type", "");
    if (type == "submit")
    {
      RequestKey k{r["client"].get<ClientId>(), r["id"].get<std::uint64_t>()};
      auto& rm = reqs[k];
      rm.client = k.client;
      rm.request = k.id;
    }
    else if (type == "send")
    {
      ++m.messages;
      if (r.contains("req"))
      {
        RequestKey k{r["req"][0].get<ClientId>(), r["req"][1].get<std::uint64_t>()};
        if (auto it = reqs.find(k); it != reqs.end())
          ++it->second.messages;
      }
    }
    else if (type == "complete")
    {
      RequestKey k{r["client"].get<ClientId>(), r["id"].get<std::uint64_t>()};
      auto& rm = reqs[k];
      rm.completed = true;
      rm.latency = r["latency"].get<Time>();
      rm.fallback = r["fallback"].get<bool>();
      rm.view = r["view"].get<View>();
    }
    else if (type == "install" && !r.value("byz", false))
    {
      auto v = r["view"].get<View>();
      if (v > 0)
        views.insert(v);
      m.final_view = std::max(m.final_view, v);
    }
  }

  std::vector<double> latencies, counts;
  for (auto& [k, rm] : reqs)
  {
    counts.push_back(double(rm.messages));
    if (rm.completed)
    {
      ++m.completed;
      m.fallbacks += rm.fallback;
      latencies.push_back(double(*rm.latency));
    }
    m.requests.push_back(rm);
  }
  m.median_latency = median(latencies);
  m.median_messages = median(counts);
  m.view_changes = views.size();
  return m;
}

const std::vector<std::string>& csv_columns()
{
  static const std::vector<std::string> cols{
    "row_type", "scenario", "variant",  "f",        "n",    "seed",
    "client",   "request",  "completed", "latency", "messages", "fallback",
    "view",     "view_changes"};
  return cols;
}

void write_csv_header(std::ostream& os)
{
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i)
    os << (i ? "," : "") << cols[i];
  os << '\n';
}

void write_csv_rows(std::ostream& os, const RunMetrics& m)
{
  auto prefix = [&](const char* row_type) {
    os << row_type << ',' << m.scenario << ',' << m.variant << ',' << m.f << ','
       << m.n << ',' << m.seed << ',';
  };
  for (const auto& r : m.requests)
  {
    prefix("request");
    os << r.client << ',' << r.request << ',' << int(r.completed) << ','
       << opt(r.latency) << ',' << r.messages << ',' << int(r.fallback) << ','
       << opt(r.view) << ',' << m.view_changes << '\n';
  }
  // Aggregates: totals, then medians over requests.
  prefix("total");
  os << ",," << m.completed << ",," << m.messages << ',' << m.fallbacks << ','
     << m.final_view << ',' << m.view_changes << '\n';
  prefix("median");
  os << ",,," << opt(m.median_latency) << ',' << opt(m.median_messages) << ",,,"
     << m.view_changes << '\n';
}

void write_csv(std::ostream& os, const std::vector<RunMetrics>& runs)
{
  write_csv_header(os);
  for (const auto& m : runs)
    write_csv_rows(os, m);
}

SweepParam parse_sweep_param(const std::string& spec)
{
  auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
    throw ConfigError("sweep parameter looks like key=1..5 or key=a,b, got '" + spec + "'");
  SweepParam p{spec.substr(0, eq), {}};
  auto rhs = spec.substr(eq + 1);
  if (auto dots = rhs.find(".."); dots != std::string::npos)
  {
    long long lo = 0, hi = 0;
    try
    {
      std::size_t used_lo = 0, used_hi = 0;
      lo = std::stoll(rhs.substr(0, dots), &used_lo);
      hi = std::stoll(rhs.substr(dots + 2), &used_hi);
      if (used_lo != dots || used_hi != rhs.size() - dots - 2)
        throw std::invalid_argument(rhs);
    }
    catch (const std::exception&)
    {
      throw ConfigError("bad range '" + rhs + "'");
    }
    if (hi < lo)
      throw ConfigError("empty range '" + rhs + "'");
    for (auto v = lo; v <= hi; ++v)
      p.values.push_back(std::to_string(v));
    return p;
  }
  std::stringstream ss(rhs);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty())
      p.values.push_back(item);
  if (p.values.empty())
    throw ConfigError("no values in '" + spec + "'");
  return p;
}

std::vector<Scenario> expand_sweep(const YAML::Node& doc, const std::vector<SweepParam>& params)
{
  std::vector<Scenario> out;
  std::vector<std::size_t> idx(params.size(), 0);
  while (true)
  {
    auto copy = YAML::Clone(doc);
    std::string suffix;
    for (std::size_t i = 0; i < params.size(); ++i)
    {
      assign(copy, params[i].key, params[i].values[idx[i]]);
      suffix += "/" + params[i].key + "=" + params[i].values[idx[i]];
    }
    auto s = load_scenario(copy);
    s.name += suffix;
    out.push_back(std::move(s));

    std::size_t i = params.size();
    while (i > 0 && ++idx[i - 1] == params[i - 1].values.size())
      idx[--i] = 0;
    if (i == 0)
      break;
  }
  return out;
}

std::vector<std::pair<RunMetrics, Transcript>>
run_suite(const std::vector<Scenario>& scenarios, unsigned threads)
{
  std::vector<std::pair<RunMetrics, Transcript>> out(scenarios.size());
  std::vector<std::exception_ptr> errors(scenarios.size());
  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, std::max<std::size_t>(1, scenarios.size()));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (auto i = next++; i < scenarios.size(); i = next++)
    {
      try
      {
        auto t = sim::run(scenarios[i]);
        out[i] = {metrics(t), std::move(t)};
      }
      catch (...)
      {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i)
    pool.emplace_back(worker);
  worker();
  for (auto& th : pool)
    th.join();
  for (auto& e : errors)
    if (e)
      std::rethrow_exception(e);
  return out;
}

} // namespace sacz::harness
