// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

#include "sacz/history.hpp"

namespace sacz::history {

Digest genesis()
{
  static const Digest d = crypto::hash(std::string_view("sacz/genesis-history"));
  return d;
}

Digest extend(const Digest& prev, View view, Counter counter,
              const Digest& request_digest)
{
  Writer w;
  w.str("HISTORY");
  w.digest(prev);
  w.u64(view);
  w.u64(counter);
  w.digest(request_digest);
  return crypto::hash(w.data());
}

ExecResult StateMachine::execute(const msg::OrderRequestMsg& m)
{
  ExecResult r;
  r.parent = head_;
  head_ = extend(head_, m);
  ++position_;
  r.digest = head_;
  r.position = position_;

  const auto& req = m.request;
  auto it = state_.clients.find(req.client);
  if (it != state_.clients.end() && req.id <= it->second.id)
  {
    if (req.id == it->second.id)
      r.response = it->second.response;
    return r;
  }
  r.fresh = true;
  r.response = app::apply(state_.kv, req.op);
  state_.clients[req.client] = msg::ClientRecord{req.id, r.response, m, head_};
  return r;
}

} // namespace sacz::history
