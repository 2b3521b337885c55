#include "arcseal/sim.hpp"

#include <algorithm>

#include "arcseal/error.hpp"

namespace arcseal::node {

namespace {
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
}  // namespace

SimNet::SimNet(ledger::AuthoritySet authorities, std::vector<NodeConfig> configs, std::uint64_t seed)
    : authorities_(std::move(authorities)), rng_(seed ^ 0x51A715ULL) {
  double min_interval = 1e9;
  for (const auto& cfg : configs) min_interval = std::min(min_interval, cfg.seal_interval_s);
  tick_dt_ = std::max(1e-3, min_interval / 20.0);

  for (auto& cfg : configs) {
    const std::string id = cfg.node_id;
    NodeCore::Hooks hooks;
    hooks.send = [this, id](const std::string& peer, const WireMessage& msg) {
      if (link_cut(id, peer, now_)) return;
      Event e;
      e.time = now_ + 0.005 + 0.02 * uniform01(rng_);
      e.seq = seq_++;
      e.type = 0;
      e.to = peer;
      e.from = id;
      e.msg = msg;
      queue_.push(std::move(e));
    };
    hooks.log = [](const std::string&) {};
    nodes_.emplace(id, std::make_unique<NodeCore>(cfg, authorities_, std::move(hooks)));
  }

  for (auto& [id, core] : nodes_) {
    core->start(0.0);
    schedule_tick(id, tick_dt_ * (0.25 + 0.5 * uniform01(rng_)));
  }
  // full-mesh connectivity per the static peer lists
  for (auto& [id, core] : nodes_)
    for (const std::string& peer : core->config().peers)
      if (nodes_.count(peer) != 0) core->on_peer_connected(peer, 0.0);
}

void SimNet::add_partition(double t0, double t1, std::set<std::string> group) {
  partitions_.push_back({t0, t1, std::move(group)});
}

bool SimNet::link_cut(const std::string& a, const std::string& b, double t) const {
  for (const auto& p : partitions_) {
    if (t >= p.t0 && t < p.t1) {
      const bool a_in = p.group.count(a) != 0;
      const bool b_in = p.group.count(b) != 0;
      if (a_in != b_in) return true;
    }
  }
  return false;
}

void SimNet::schedule_tick(const std::string& id, double t) {
  Event e;
  e.time = t;
  e.seq = seq_++;
  e.type = 2;
  e.to = id;
  queue_.push(std::move(e));
}

void SimNet::submit_at(double t, const std::string& node_id, ledger::ChainRecord record,
                       Credential cred) {
  Event e;
  e.time = t;
  e.seq = seq_++;
  e.type = 1;
  e.to = node_id;
  e.record = std::move(record);
  e.cred = std::move(cred);
  queue_.push(std::move(e));
}

void SimNet::run_until(double t_end) {
  while (!queue_.empty() && queue_.top().time <= t_end) {
    Event e = queue_.top();
    queue_.pop();
    now_ = e.time;
    auto it = nodes_.find(e.to);
    if (it == nodes_.end()) continue;
    switch (e.type) {
      case 0:
        // messages already in flight when a partition begins still arrive
        it->second->on_message(e.from, e.msg, now_);
        break;
      case 1:
        it->second->submit(e.record, e.cred, now_);
        break;
      case 2:
        it->second->on_tick(now_);
        schedule_tick(e.to, now_ + tick_dt_);
        break;
    }
  }
  now_ = t_end;
}

NodeCore& SimNet::node(const std::string& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) raise(ErrorCode::NotFound, "no node " + id);
  return *it->second;
}

const NodeCore& SimNet::node(const std::string& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) raise(ErrorCode::NotFound, "no node " + id);
  return *it->second;
}

std::vector<std::string> SimNet::node_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, _] : nodes_) ids.push_back(id);
  return ids;
}

bool SimNet::converged() const {
  std::string tip;
  for (const auto& [id, core] : nodes_) {
    const std::string h = ledger::digest_hex(core->store().tip().hash());
    if (tip.empty())
      tip = h;
    else if (tip != h)
      return false;
  }
  return true;
}

}  // namespace arcseal::node
