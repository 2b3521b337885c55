#pragma once

#include <map>
#include <memory>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "arcseal/node.hpp"

namespace arcseal::node {

// Deterministic discrete-event harness: virtual time, seeded latencies,
// scripted partitions. Consensus behavior under partitions is tested here
// with exact reproducibility.
class SimNet {
 public:
  SimNet(ledger::AuthoritySet authorities, std::vector<NodeConfig> configs, std::uint64_t seed);

  // Cut every link between `group` and its complement during [t0, t1).
  void add_partition(double t0, double t1, std::set<std::string> group);

  void submit_at(double t, const std::string& node_id, ledger::ChainRecord record, Credential cred);

  void run_until(double t_end);

  NodeCore& node(const std::string& id);
  const NodeCore& node(const std::string& id) const;
  std::vector<std::string> node_ids() const;

  // true when every node reports the same tip hash
  bool converged() const;
  double now() const { return now_; }

 private:
  struct Event {
    double time;
    std::uint64_t seq;
    int type;  // 0 deliver, 1 submit, 2 tick
    std::string to;
    std::string from;
    WireMessage msg;
    ledger::ChainRecord record;
    Credential cred;
  };
  struct EventOrder {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };

  bool link_cut(const std::string& a, const std::string& b, double t) const;
  void schedule_tick(const std::string& id, double t);

  ledger::AuthoritySet authorities_;
  std::map<std::string, std::unique_ptr<NodeCore>> nodes_;
  std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
  struct Partition {
    double t0, t1;
    std::set<std::string> group;
  };
  std::vector<Partition> partitions_;
  std::mt19937_64 rng_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;
  double tick_dt_;
};

}  // namespace arcseal::node
