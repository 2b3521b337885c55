#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "arcseal/ledger.hpp"
#include "arcseal/wire.hpp"

namespace arcseal::node {

struct NodeConfig {
  std::string node_id;
  std::string listen;                               // host:port in real mode
  std::vector<std::string> peers;                   // static peer list
  std::optional<ledger::AuthorityKey> authority_key;  // sealers only
  double seal_interval_s = 15.0;
  bool seal_empty = true;
  std::string chain_path;  // append-only log; empty disables persistence
  std::string store_dir;   // off-chain artifact directory
};

// Single-threaded archive-node state machine. All side effects go through
// the injected hooks, so the same logic runs under the deterministic
// simulator and the TCP transport; the caller serializes every entry point.
class NodeCore {
 public:
  struct Hooks {
    std::function<void(const std::string& peer, const WireMessage&)> send;
    std::function<void(const std::string& line)> log = [](const std::string&) {};
  };

  NodeCore(NodeConfig config, ledger::AuthoritySet authorities, Hooks hooks);

  void start(double now);  // imports genesis (or reloads the chain log)

  void on_peer_connected(const std::string& peer, double now);
  void on_peer_disconnected(const std::string& peer);
  void on_message(const std::string& peer, const WireMessage& msg, double now);
  void on_tick(double now);

  // Client-facing commit path; also invoked by SubmitRecord frames.
  RecordAck submit(const ledger::ChainRecord& record, const Credential& credential, double now);

  const ledger::RecordStore& store() const { return store_; }
  const NodeConfig& config() const { return config_; }
  bool is_sealer() const { return sealer_index_ >= 0; }
  std::size_t pending_count() const { return pending_.size(); }
  std::uint64_t blocks_sealed() const { return blocks_sealed_; }

  // "name value" metrics lines
  std::vector<std::string> metrics() const;

 private:
  void try_seal(double now);
  void import_and_gossip(const ledger::LedgerBlock& block, const std::string& from_peer, double now);
  void prune_pending();
  void broadcast(const WireMessage& msg, const std::string& except_peer = "");

  NodeConfig config_;
  ledger::AuthoritySet authorities_;
  Hooks hooks_;
  ledger::RecordStore store_;
  int sealer_index_ = -1;

  std::vector<std::string> connected_peers_;
  std::deque<ledger::ChainRecord> pending_;
  std::unordered_set<std::string> pending_uids_;
  std::unordered_set<std::string> seen_blocks_;
  double last_tip_change_ = 0.0;
  bool started_ = false;
  std::uint64_t blocks_sealed_ = 0;
};

struct BenchRow {
  std::size_t store_size = 0;
  double commit_tps = 0.0;  // transaction creation + submission throughput
  double fetch_tps = 0.0;
};

// In-process store benchmark: commits records in batches of `batch_size`
// and measures fetch throughput at store sizes 10^1 .. 10^max_decade.
std::vector<BenchRow> batch_bench(std::size_t max_decade = 5, std::size_t batch_size = 1000,
                                  std::uint64_t seed = 1);

}  // namespace arcseal::node
