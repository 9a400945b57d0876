// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "sacz/adversary.hpp"

#include "sacz/history.hpp"

#include <map>

namespace sacz::adv {

using namespace msg;

bool Env::coin(double p)
{
  return std::bernoulli_distribution(p)(rng);
}

std::uint64_t Env::uniform(std::uint64_t lo, std::uint64_t hi)
{
  return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

namespace {

bool to_peer(const Env& env, const Envelope& e)
{
  return e.to.is_replica() && e.to.index != env.self.id();
}

std::vector<Envelope> pass(Envelope e)
{
  std::vector<Envelope> out;
  out.push_back(std::move(e));
  return out;
}

class DropAll final : public Script
{
public:
  std::string_view name() const override { return "drop_all"; }
  std::vector<Envelope> apply(Env& env, Envelope e) override
  {
    if (e.to == NodeId::replica(env.self.id()))
      return pass(std::move(e));
    return {};
  }
};

// Starves a random half of the peers of order-requests.
class DropSelective final : public Script
{
public:
  std::string_view name() const override { return "drop_selective"; }
  std::vector<Envelope> apply(Env& env, Envelope e) override
  {
    if (std::holds_alternative<OrderRequestMsg>(e.message) && to_peer(env, e) &&
        env.coin(0.5))
      return {};
    return pass(std::move(e));
  }
};

class Delay final : public Script
{
public:
  std::string_view name() const override { return "delay"; }
  std::vector<Envelope> apply(Env& env, Envelope e) override
  {
    if (e.to != NodeId::replica(env.self.id()))
      e.extra_delay += env.uniform(0, 4 * env.self.params().replica_timeout);
    return pass(std::move(e));
  }
};

// Sends a conflicting order-request to part of the peers. A key-holding
// primary reuses the counter value; a counter-backed one can only take the
// next value, which opens a hole for everyone else.
class Equivocate final : public Script
{
public:
  std::string_view name() const override { return "equivocate"; }
  std::vector<Envelope> apply(Env& env, Envelope e) override
  {
    const auto* o = std::get_if<OrderRequestMsg>(&e.message);
    if (!o || !to_peer(env, e) || !env.self.is_primary() || o->view != env.self.view())
      return pass(std::move(e));
    auto key = std::make_pair(o->view, o->cert.counter);
    claims_[key] = o->history;
    auto it = alternatives_.find(key);
    if (it == alternatives_.end())
      it = alternatives_.emplace(key, build(env, *o, prior_claim(env, *o))).first;
    if (it->second && (e.to.index + o->cert.counter) % 2 == 1)
      e.message = *it->second;
    return pass(std::move(e));
  }

private:
  // History the honest order-request before `o` claimed, so the forgery
  // chains exactly like the original does.
  crypto::Digest prior_claim(Env& env, const OrderRequestMsg& o) const
  {
    if (o.cert.counter <= 1)
      return env.self.view_certificate().start_digest;
    auto it = claims_.find({o.view, o.cert.counter - 1});
    return it != claims_.end() ? it->second : o.history;
  }

  static std::optional<OrderRequestMsg> build(Env& env, const OrderRequestMsg& o,
                                              const crypto::Digest& prior)
  {
    auto* seq = env.self.sequencer();
    if (!seq)
      return std::nullopt;
    const RequestMsg* other = nullptr;
    for (const auto& r : env.requests)
      if (r.key() != o.request.key())
        other = &r;
    const RequestMsg& alt = other ? *other : o.request;
    OrderRequestMsg forged{o.view, {}, alt, {}, {}};
    if (auto c = seq->certify_at(o.cert.counter, request_digest(alt)))
    {
      if (!other)
        return std::nullopt; // nothing different to equivocate with
      forged.cert = *c;
    }
    else
    {
      try
      {
        forged.cert = seq->next(request_digest(alt));
      }
      catch (const tmc::TmcError&)
      {
        return std::nullopt;
      }
    }
    forged.history = history::extend(prior, forged);
    sign(forged, env.self.host_key());
    return forged;
  }

  std::map<std::pair<View, Counter>, std::optional<OrderRequestMsg>> alternatives_;
  std::map<std::pair<View, Counter>, crypto::Digest> claims_;
};

// Wastes counter values so later order-requests arrive with gaps.
class BurnCounter final : public Script
{
public:
  std::string_view name() const override { return "burn_counter"; }
  std::vector<Envelope> apply(Env& env, Envelope e) override
  {
    const auto* o = std::get_if<OrderRequestMsg>(&e.message);
    auto* seq = env.self.sequencer();
    if (o && seq && env.self.is_primary() && o->view == env.self.view())
    {
      auto key = std::make_pair(o->view, o->cert.counter);
      if (seen_.insert(key).second && env.coin(0.5))
      {
        try
        {
          seq->next(crypto::hash("burn/" + std::to_string(env.uniform(0, ~0ULL))));
        }
        catch (const tmc::TmcError&)
        {}
      }
    }
    return pass(std::move(e));
  }

private:
  std::set<std::pair<View, Counter>> seen_;
};

// Hands some peers an older new-view instead of the current one.
class StaleNewView final : public Script
{
public:
  std::string_view name() const override { return "stale_new_view"; }
  std::vector<Envelope> apply(Env& env, Envelope e) override
  {
    const auto* nv = std::get_if<NewViewMsg>(&e.message);
    if (!nv || !to_peer(env, e) || !env.coin(0.5))
      return pass(std::move(e));
    const NewViewMsg* older = nullptr;
    for (const auto& m : env.new_views)
      if (m.view < nv->view && (!older || m.view > older->view))
        older = &m;
    if (!older)
      return {};
    e.message = *older;
    return pass(std::move(e));
  }
};

// Confirms a different new-view digest to some peers.
class SplitViewConfirm final : public Script
{
public:
  std::string_view name() const override { return "split_view_confirm"; }
  std::vector<Envelope> apply(Env& env, Envelope e) override
  {
    auto* vc = std::get_if<ViewConfirmMsg>(&e.message);
    if (!vc || !to_peer(env, e) || e.to.index % 2 == 0)
      return pass(std::move(e));
    vc->new_view_digest = crypto::hash("split/" + std::to_string(vc->view));
    sign(*vc, env.self.host_key());
    return pass(std::move(e));
  }
};

class CorruptReply final : public Script
{
public:
  std::string_view name() const override { return "corrupt_reply"; }
  std::vector<Envelope> apply(Env& env, Envelope e) override
  {
    auto* r = std::get_if<ReplyMsg>(&e.message);
    if (!r || !env.coin(0.5))
      return pass(std::move(e));
    r->response = to_bytes("CORRUPT");
    sign(*r, env.self.host_key());
    return pass(std::move(e));
  }
};

// Reports only what the base view certificate already forces it to report.
class TruncateViewChange final : public Script
{
public:
  std::string_view name() const override { return "truncate_view_change"; }
  std::vector<Envelope> apply(Env& env, Envelope e) override
  {
    auto* vc = std::get_if<ViewChangeMsg>(&e.message);
    if (!vc)
      return pass(std::move(e));
    auto cp = checkpoint_point(vc->checkpoint).position;
    std::size_t keep = vc->base.start_length > cp ? vc->base.start_length - cp : 0;
    if (keep < vc->executed.size())
    {
      vc->executed.resize(keep);
      sign(*vc, env.self.host_key());
    }
    return pass(std::move(e));
  }
};

class Fuzz final : public Script
{
public:
  std::string_view name() const override { return "fuzz"; }
  std::vector<Envelope> apply(Env& env, Envelope e) override
  {
    if (e.to == NodeId::replica(env.self.id()))
      return pass(std::move(e));
    auto roll = env.uniform(0, 99);
    if (roll < 10)
      return {};
    if (roll < 20)
      return delay_.apply(env, std::move(e));
    if (roll >= 50)
      return pass(std::move(e));
    return std::visit(
      [&](const auto& m) -> std::vector<Envelope> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, OrderRequestMsg>)
        {
          switch (env.uniform(0, 2))
          {
            case 0:
              return equivocate_.apply(env, std::move(e));
            case 1:
              return burn_.apply(env, std::move(e));
            default:
              return drop_.apply(env, std::move(e));
          }
        }
        else if constexpr (std::is_same_v<T, ViewChangeMsg>)
          return truncate_.apply(env, std::move(e));
        else if constexpr (std::is_same_v<T, ViewConfirmMsg>)
          return split_.apply(env, std::move(e));
        else if constexpr (std::is_same_v<T, NewViewMsg>)
          return stale_.apply(env, std::move(e));
        else if constexpr (std::is_same_v<T, ReplyMsg>)
          return corrupt_.apply(env, std::move(e));
        else
          return pass(std::move(e));
      },
      e.message);
  }

private:
  Delay delay_;
  DropSelective drop_;
  Equivocate equivocate_;
  BurnCounter burn_;
  TruncateViewChange truncate_;
  SplitViewConfirm split_;
  StaleNewView stale_;
  CorruptReply corrupt_;
};

} // namespace

const std::vector<std::string>& script_names()
{
  static const std::vector<std::string> names{
    "drop_all",       "drop_selective",     "delay",         "equivocate",
    "burn_counter",   "stale_new_view",     "split_view_confirm",
    "corrupt_reply",  "truncate_view_change", "fuzz"};
  return names;
}

std::unique_ptr<Script> make_script(std::string_view name)
{
  if (name == "drop_all")
    return std::make_unique<DropAll>();
  if (name == "drop_selective")
    return std::make_unique<DropSelective>();
  if (name == "delay")
    return std::make_unique<Delay>();
  if (name == "equivocate")
    return std::make_unique<Equivocate>();
  if (name == "burn_counter")
    return std::make_unique<BurnCounter>();
  if (name == "stale_new_view")
    return std::make_unique<StaleNewView>();
  if (name == "split_view_confirm")
    return std::make_unique<SplitViewConfirm>();
  if (name == "corrupt_reply")
    return std::make_unique<CorruptReply>();
  if (name == "truncate_view_change")
    return std::make_unique<TruncateViewChange>();
  if (name == "fuzz")
    return std::make_unique<Fuzz>();
  throw std::invalid_argument("unknown adversary script: " + std::string(name));
}

} // namespace sacz::adv
