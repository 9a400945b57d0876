// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "sacz/simnet.hpp"

#include "sacz/app.hpp"

#include <algorithm>

namespace sacz::sim {

using nlohmann::json;
using namespace msg;

namespace {

std::string fault_kind_name(FaultKind k)
{
  switch (k)
  {
    case FaultKind::Crashed:
      return "crashed";
    case FaultKind::Slow:
      return "slow";
    case FaultKind::Byzantine:
      return "byzantine";
    case FaultKind::TmcCrash:
      return "tmc_crash";
  }
  return "?";
}

json request_json(const RequestKey& k)
{
  return json::array({k.client, k.id});
}

std::uint32_t group_of(const Partition& p, NodeId n)
{
  for (std::size_t g = 0; g < p.groups.size(); ++g)
    if (std::find(p.groups[g].begin(), p.groups[g].end(), n) != p.groups[g].end())
      return static_cast<std::uint32_t>(g);
  return static_cast<std::uint32_t>(p.groups.size()); // the implicit rest group
}

} // namespace

// Whatever a node is allowed to do to the world goes through its port.
class Simulation::Port final : public Context
{
public:
  Port(Simulation& sim, NodeId self) : sim_(sim), self_(self) {}

  Time now() const override { return sim_.now_; }
  void send(NodeId to, Message m) override { sim_.send_from(self_, to, std::move(m)); }
  void set_timer(const TimerKey& key, Time delay) override
  {
    sim_.set_timer(self_, key, delay);
  }
  void cancel_timer(const TimerKey& key) override { sim_.cancel_timer(self_, key); }
  void observe(Observation o) override { sim_.observe(self_, o); }

private:
  Simulation& sim_;
  NodeId self_;
};

struct Simulation::Slot
{
  NodeId id;
  std::unique_ptr<Port> port;
  std::unique_ptr<Node> node;
  Replica* replica = nullptr;
  Client* client = nullptr;
  const Fault* fault = nullptr;
  std::vector<std::unique_ptr<adv::Script>> scripts;
  std::vector<RequestMsg> requests;
  std::set<RequestKey> request_keys;
  std::vector<NewViewMsg> new_views;
};

Simulation::Simulation(Scenario scenario)
  : scenario_((scenario.validate(), std::move(scenario))),
    system_(make_system(scenario_.params, scenario_.seed, scenario_.workload.clients,
                        scenario_.scheme)),
    effective_gst_(scenario_.network.effective_gst()),
    net_rng_(scenario_.seed * 0x9e3779b97f4a7c15ULL + 1),
    adv_rng_(scenario_.seed * 0xc2b2ae3d27d4eb4fULL + 2)
{
  const auto& params = scenario_.params;
  for (ReplicaId r = 0; r < params.n; ++r)
  {
    auto s = std::make_unique<Slot>();
    s->id = NodeId::replica(r);
    s->port = std::make_unique<Port>(*this, s->id);
    auto& secrets = system_.replicas[r];
    auto rep = std::make_unique<Replica>(r, system_.genesis, secrets.key, secrets.tmc,
                                         secrets.view0_counter, *s->port);
    s->replica = rep.get();
    s->node = std::move(rep);
    s->fault = scenario_.fault_of(r);
    if (s->fault && s->fault->kind == FaultKind::Byzantine)
      for (const auto& name : s->fault->scripts)
        s->scripts.push_back(adv::make_script(name));
    slots_.push_back(std::move(s));
  }
  for (ClientId c = 0; c < scenario_.workload.clients; ++c)
  {
    auto s = std::make_unique<Slot>();
    s->id = NodeId::client(c);
    s->port = std::make_unique<Port>(*this, s->id);
    auto cl = std::make_unique<Client>(c, system_.genesis, system_.clients[c], *s->port);
    cl->on_complete([this, c](const Client::Completion&) {
      if (issued_[c] == 0)
        return; // a manual submission
      if (issued_[c] < scenario_.workload.requests)
        schedule(now_, Action{[this, c] { next_workload_request(c); }});
      else if (--outstanding_ == 0)
        settled_at_ = now_;
    });
    s->client = cl.get();
    s->node = std::move(cl);
    slots_.push_back(std::move(s));
  }

  // Keys a counter certificate may legitimately verify under.
  if (params.uses_tmc())
  {
    if (system_.genesis.view0.attestation)
      counter_keys_.insert(system_.genesis.view0.attestation->instance_key);
  }
  else
  {
    counter_keys_.insert(system_.genesis.replica_keys.begin(),
                         system_.genesis.replica_keys.end());
  }

  for (const auto& f : scenario_.faults)
  {
    if (f.kind == FaultKind::TmcCrash)
    {
      auto tmc = system_.replicas[f.replica].tmc;
      schedule(f.at, Action{[tmc] { tmc->crash(); }});
    }
  }
  record_header();
}

Simulation::~Simulation() = default;

Simulation::Slot& Simulation::slot(NodeId id)
{
  return id.is_replica() ? *slots_.at(id.index)
                         : *slots_.at(scenario_.params.n + id.index);
}

Replica& Simulation::replica(ReplicaId r)
{
  return *slot(NodeId::replica(r)).replica;
}

Client& Simulation::client(ClientId c)
{
  return *slot(NodeId::client(c)).client;
}

bool Simulation::crashed(NodeId id, Time t) const
{
  if (!id.is_replica())
    return false;
  const auto* f = scenario_.fault_of(id.index);
  return f && f->kind == FaultKind::Crashed && t >= f->at;
}

void Simulation::record_header()
{
  const auto& p = scenario_.params;
  auto nominal = variant_thresholds(p.variant, p.f);
  json faults = json::array();
  for (const auto& f : scenario_.faults)
    faults.push_back({{"replica", f.replica},
                      {"kind", fault_kind_name(f.kind)},
                      {"at", f.at},
                      {"extra", f.extra},
                      {"scripts", f.scripts}});
  transcript_.records.push_back({
    {"type", "scenario"},
    {"name", scenario_.name},
    {"variant", std::string(variant_name(p.variant))},
    {"f", p.f},
    {"n", p.n},
    {"n_tmc", p.n_tmc},
    {"completion", p.completion},
    {"nominal_completion", nominal.completion},
    {"fallback", p.fallback},
    {"commit_threshold", p.commit_threshold()},
    {"quorum", p.quorum()},
    {"accuse_threshold", p.accuse_threshold()},
    {"inclusion_threshold", p.inclusion_threshold()},
    {"checkpoint_interval", p.checkpoint_interval},
    {"watermark_windows", p.watermark_windows},
    {"replica_timeout", p.replica_timeout},
    {"client_timeout", p.client_timeout},
    {"seed", scenario_.seed},
    {"gst", effective_gst_},
    {"bound", scenario_.network.bound},
    {"base_delay", scenario_.network.base_delay},
    {"jitter", scenario_.network.jitter},
    {"time_bound", scenario_.time_bound},
    {"faults", faults},
    {"clients", scenario_.workload.clients},
    {"requests", scenario_.workload.requests},
    {"genesis_digest", history::genesis().hex()},
  });
}

void Simulation::schedule(Time at, Event e)
{
  queue_.emplace(std::make_pair(at, seq_++), std::move(e));
}

void Simulation::start()
{
  if (started_)
    return;
  started_ = true;
  for (auto& s : slots_)
    s->node->start();
  if (scenario_.workload.requests > 0)
  {
    outstanding_ = scenario_.workload.clients;
    for (ClientId c = 0; c < scenario_.workload.clients; ++c)
      next_workload_request(c);
  }
}

void Simulation::next_workload_request(ClientId c)
{
  auto i = ++issued_[c];
  auto key = "c" + std::to_string(c) + "/k" + std::to_string(i);
  // Every third operation reads back the key written just before it.
  Bytes op = i % 3 == 0 ? app::get("c" + std::to_string(c) + "/k" + std::to_string(i - 1))
                        : app::put(key, "v" + std::to_string(i));
  client(c).submit(std::move(op));
}

void Simulation::submit(ClientId c, Bytes op)
{
  if (!started_)
    start();
  client(c).submit(std::move(op));
}

bool Simulation::finished() const
{
  if (!started_)
    return false;
  if (queue_.empty())
    return true;
  Time next = queue_.begin()->first.first;
  if (next > scenario_.time_bound)
    return true;
  // Leave room for checkpoints and view changes to settle after the last
  // completion before calling the run over.
  const auto& p = scenario_.params;
  Time settle = 4 * (p.replica_timeout + scenario_.network.bound);
  return outstanding_ == 0 && next > settled_at_ + settle;
}

bool Simulation::step()
{
  if (!started_)
    start();
  if (finished())
    return false;
  auto node = queue_.extract(queue_.begin());
  now_ = node.key().first;
  std::visit(
    [&](auto& e) {
      using T = std::decay_t<decltype(e)>;
      if constexpr (std::is_same_v<T, Delivery>)
      {
        if (crashed(e.to, now_))
          return;
        auto& s = slot(e.to);
        if (!s.scripts.empty())
          learn(s, e.message);
        s.node->on_message(e.from, e.message);
      }
      else if constexpr (std::is_same_v<T, TimerFire>)
      {
        auto it = timers_.find({e.node, e.key});
        if (it == timers_.end() || it->second != e.generation)
          return;
        timers_.erase(it);
        if (crashed(e.node, now_))
          return;
        slot(e.node).node->on_timer(e.key);
      }
      else
      {
        e.run();
      }
    },
    node.mapped());
  return true;
}

void Simulation::run()
{
  start();
  while (step())
  {}
}

void Simulation::run_until(Time t)
{
  start();
  while (!queue_.empty() && queue_.begin()->first.first <= t)
  {
    if (!step())
      break;
  }
  now_ = std::max(now_, t);
}

void Simulation::learn(Slot& s, const Message& m)
{
  auto remember = [&](const RequestMsg& r) {
    if (s.request_keys.insert(r.key()).second)
      s.requests.push_back(r);
  };
  if (const auto* r = std::get_if<RequestMsg>(&m))
    remember(*r);
  else if (const auto* o = std::get_if<OrderRequestMsg>(&m))
    remember(o->request);
  else if (const auto* nv = std::get_if<NewViewMsg>(&m))
    s.new_views.push_back(*nv);
}

void Simulation::send_from(NodeId from, NodeId to, Message m)
{
  if (crashed(from, now_))
    return;
  if (const auto* nv = std::get_if<NewViewMsg>(&m); nv && nv->attestation)
  {
    // Honest code produced this attestation through the counter's init call.
    counter_keys_.insert(nv->attestation->instance_key);
  }
  auto& s = slot(from);
  if (s.scripts.empty())
  {
    dispatch(from, to, std::move(m), 0, false);
    return;
  }

  if (auto* o = std::get_if<OrderRequestMsg>(&m))
    learn(s, *o);
  adv::Env env{*s.replica, adv_rng_, now_, s.requests, s.new_views};
  std::vector<adv::Envelope> batch;
  batch.push_back({to, std::move(m), 0});
  for (auto& script : s.scripts)
  {
    std::vector<adv::Envelope> next;
    for (auto& e : batch)
      for (auto& out : script->apply(env, std::move(e)))
        next.push_back(std::move(out));
    batch = std::move(next);
  }
  const Validator& validator = s.replica->validator();
  for (auto& e : batch)
  {
    if (!validator.signatures_valid(e.message, counter_keys_))
      throw adv::InvalidAdversary("replica " + std::to_string(from.index) +
                                  " emitted an unforgeable signature in a " +
                                  std::string(kind_name(e.message)));
    dispatch(from, e.to, std::move(e.message), e.extra_delay, true);
  }
}

std::optional<Time> Simulation::partition_release(NodeId from, NodeId to) const
{
  std::optional<Time> release;
  for (const auto& p : scenario_.network.partitions)
  {
    if (now_ < p.from || now_ >= p.to)
      continue;
    if (group_of(p, from) != group_of(p, to))
      release = std::max(release.value_or(0), p.to);
  }
  return release;
}

Time Simulation::delay(NodeId from, NodeId to)
{
  if (from == to)
    return 0;
  const auto& net = scenario_.network;
  Time d = net.base_delay;
  bool linked = false;
  for (const auto& l : net.links)
    if (l.from == from && l.to == to)
    {
      d = l.delay;
      linked = true;
    }
  if (!linked && !net.regions.empty())
  {
    std::optional<std::uint32_t> ra, rb;
    for (const auto& [node, region] : net.regions)
    {
      if (node == from)
        ra = region;
      if (node == to)
        rb = region;
    }
    if (ra && rb)
      d = net.region_delays[*ra][*rb];
  }
  d += std::uniform_int_distribution<Time>(0, net.jitter)(net_rng_);
  if (now_ < effective_gst_ && net.pre_gst_extra > 0)
    d += std::uniform_int_distribution<Time>(0, net.pre_gst_extra)(net_rng_);
  if (from.is_replica())
    if (const auto* f = scenario_.fault_of(from.index); f && f->kind == FaultKind::Slow)
      d += f->extra;
  return d;
}

std::string Simulation::counter_key_of(const OrderRequestMsg& m) const
{
  for (const auto& k : counter_keys_)
    if (tmc::verify_certificate(k, m.cert))
      return k.hex();
  return "";
}

void Simulation::dispatch(NodeId from, NodeId to, Message m, Time extra, bool byzantine)
{
  Time at = now_ + delay(from, to) + extra;
  if (from != to)
    if (auto release = partition_release(from, to))
      at = std::max(at, *release);
  bool lost = crashed(to, at);

  json rec{{"type", "send"},   {"i", sends_++},       {"t", now_},
           {"from", from.str()}, {"to", to.str()},      {"kind", kind_name(m)},
           {"deliver", at}};
  if (lost)
    rec["lost"] = true;
  if (byzantine)
    rec["byz"] = true;
  if (from.is_replica())
    rec["phase"] = slot(from).node->phase() == Phase::Active ? "active" : "view_changing";
  if (auto k = attributed_request(m))
    rec["req"] = request_json(*k);
  if (const auto* o = std::get_if<OrderRequestMsg>(&m))
  {
    rec["view"] = o->view;
    rec["counter"] = o->cert.counter;
    rec["ckey"] = counter_key_of(*o);
    rec["digest"] = o->cert.message_digest.hex();
  }
  else if (const auto* r = std::get_if<ReplyMsg>(&m))
  {
    rec["view"] = r->order.view;
    rec["match"] = reply_match_key(*r).hex();
  }
  transcript_.records.push_back(std::move(rec));

  if (!lost)
    schedule(at, Delivery{from, to, std::move(m)});
}

void Simulation::set_timer(NodeId node, const TimerKey& key, Time delay)
{
  auto gen = ++timer_generation_;
  timers_[{node, key}] = gen;
  schedule(now_ + delay, TimerFire{node, key, gen});
}

void Simulation::cancel_timer(NodeId node, const TimerKey& key)
{
  timers_.erase({node, key});
}

void Simulation::observe(NodeId node, const Observation& o)
{
  json rec = std::visit(
    [&](const auto& x) -> json {
      using T = std::decay_t<decltype(x)>;
      if constexpr (std::is_same_v<T, obs::Exec>)
        return {{"type", "exec"},
                {"replica", x.replica},
                {"view", x.view},
                {"counter", x.counter},
                {"position", x.position},
                {"req", request_json(x.request)},
                {"parent", x.parent.hex()},
                {"digest", x.digest.hex()},
                {"replay", x.replay}};
      else if constexpr (std::is_same_v<T, obs::Install>)
        return {{"type", "install"},
                {"replica", x.replica},
                {"view", x.view},
                {"start_length", x.start_length},
                {"start_digest", x.start_digest.hex()},
                {"ckey", x.counter_key.hex()},
                {"confirms", x.confirms},
                {"source", x.source}};
      else if constexpr (std::is_same_v<T, obs::CheckpointStable>)
        return {{"type", "checkpoint_stable"},
                {"replica", x.replica},
                {"view", x.view},
                {"counter", x.counter},
                {"position", x.position},
                {"digest", x.digest.hex()},
                {"signers", x.signers},
                {"retained", x.retained}};
      else if constexpr (std::is_same_v<T, obs::StateTransfer>)
        return {{"type", "state_transfer"},
                {"replica", x.replica},
                {"view", x.view},
                {"counter", x.counter},
                {"position", x.position},
                {"digest", x.digest.hex()}};
      else if constexpr (std::is_same_v<T, obs::PhaseChange>)
        return {{"type", "phase"},
                {"replica", x.replica},
                {"phase", x.phase == Phase::Active ? "active" : "view_changing"},
                {"view", x.view}};
      else if constexpr (std::is_same_v<T, obs::Submit>)
        return {{"type", "submit"}, {"client", x.client}, {"id", x.id}};
      else
        return {{"type", "complete"},
                {"client", x.client},
                {"id", x.id},
                {"view", x.view},
                {"digest", x.digest.hex()},
                {"matching", x.matching},
                {"fallback", x.fallback},
                {"response", to_string(x.response)}};
    },
    o);
  rec["t"] = now_;
  if (const auto* s = std::get_if<obs::Submit>(&o))
    submitted_at_[{s->client, s->id}] = now_;
  else if (const auto* c = std::get_if<obs::Complete>(&o))
    rec["latency"] = now_ - submitted_at_[{c->client, c->id}];
  if (node.is_replica() && scenario_.is_byzantine(node.index))
    rec["byz"] = true;
  transcript_.records.push_back(std::move(rec));
}

const Transcript& Simulation::transcript()
{
  if (!closed_)
  {
    closed_ = true;
    std::size_t submitted = 0, completed = 0;
    for (const auto& r : transcript_.records)
    {
      auto type = r.value("type", "");
      submitted += type == "submit";
      completed += type == "complete";
    }
    transcript_.records.push_back({{"type", "end"},
                                   {"t", now_},
                                   {"sends", sends_},
                                   {"submitted", submitted},
                                   {"completed", completed}});
  }
  return transcript_;
}

Transcript run(const Scenario& scenario)
{
  Simulation sim(scenario);
  sim.run();
  return sim.transcript();
}

} // namespace sacz::sim
