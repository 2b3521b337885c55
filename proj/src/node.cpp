#include "arcseal/node.hpp"

#include <algorithm>
#include <chrono>
#include <random>

#include "arcseal/error.hpp"

namespace arcseal::node {

using ledger::ChainRecord;
using ledger::LedgerBlock;

NodeCore::NodeCore(NodeConfig config, ledger::AuthoritySet authorities, Hooks hooks)
    : config_(std::move(config)),
      authorities_(std::move(authorities)),
      hooks_(std::move(hooks)),
      store_(authorities_, config_.chain_path) {
  if (config_.authority_key.has_value()) {
    const int idx = authorities_.index_of(config_.node_id);
    if (idx < 0 || authorities_.sealers[static_cast<std::size_t>(idx)].key != *config_.authority_key)
      raise(ErrorCode::UnauthorizedSealer, config_.node_id + " key not in authority set");
    sealer_index_ = idx;
  }
}

void NodeCore::start(double now) {
  store_.load_log();
  if (store_.block_count() == 0) store_.import_block(ledger::make_genesis(authorities_));
  last_tip_change_ = now;
  started_ = true;
}

void NodeCore::on_peer_connected(const std::string& peer, double now) {
  (void)now;
  if (std::find(connected_peers_.begin(), connected_peers_.end(), peer) == connected_peers_.end())
    connected_peers_.push_back(peer);
  PeerHello hello{config_.node_id, store_.tip().height, store_.tip().hash()};
  hooks_.send(peer, WireMessage(MsgKind::PeerHello, payload_hello(hello)));
}

void NodeCore::on_peer_disconnected(const std::string& peer) {
  std::erase(connected_peers_, peer);
}

void NodeCore::broadcast(const WireMessage& msg, const std::string& except_peer) {
  for (const std::string& p : connected_peers_)
    if (p != except_peer) hooks_.send(p, msg);
}

RecordAck NodeCore::submit(const ChainRecord& record, const Credential& credential, double now) {
  RecordAck ack;
  ack.uid = record.uid;
  if (!verify_credential(authorities_, credential)) {
    ack.status = AckStatus::Unauthorized;
    return ack;
  }
  if (record.serialized_size() > ledger::kMaxRecordBytes) {
    ack.status = AckStatus::Oversize;
    return ack;
  }
  const std::string key = ledger::uid_hex(record.uid);
  if (store_.contains_uid(record.uid)) {
    ack.status = AckStatus::Duplicate;
    ack.height = store_.height_of(record.uid);
    return ack;
  }
  if (pending_uids_.count(key) != 0) {
    ack.status = AckStatus::Duplicate;
    return ack;
  }
  pending_.push_back(record);
  pending_uids_.insert(key);
  ack.status = AckStatus::Accepted;
  // gossip to every connected peer; duplicate suppression ends the flood
  Credential cred = credential;
  broadcast(WireMessage(MsgKind::SubmitRecord, payload_submit(cred, record)));
  (void)now;
  return ack;
}

void NodeCore::prune_pending() {
  std::deque<ChainRecord> keep;
  for (ChainRecord& r : pending_) {
    if (!store_.contains_uid(r.uid))
      keep.push_back(std::move(r));
    else
      pending_uids_.erase(ledger::uid_hex(r.uid));
  }
  pending_ = std::move(keep);
}

void NodeCore::import_and_gossip(const LedgerBlock& block, const std::string& from_peer, double now) {
  const std::string key = ledger::digest_hex(block.hash());
  if (seen_blocks_.count(key) != 0) return;
  try {
    const bool tip_changed = store_.import_block(block);
    seen_blocks_.insert(key);
    if (tip_changed) {
      last_tip_change_ = now;
      prune_pending();
    }
    broadcast(WireMessage(MsgKind::ProposeBlock, payload_block(block)), from_peer);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BadParent && !from_peer.empty()) {
      // missing ancestors: pull the peer's chain
      hooks_.send(from_peer, WireMessage(MsgKind::ChainRequest, payload_chain_request(0)));
    } else {
      hooks_.log("import failed from " + from_peer + ": " + e.what());
    }
  }
}

void NodeCore::on_message(const std::string& peer, const WireMessage& msg, double now) {
  if (!started_) return;
  switch (static_cast<MsgKind>(msg.kind)) {
    case MsgKind::SubmitRecord: {
      Credential cred;
      ChainRecord rec;
      parse_submit(msg.payload, cred, rec);
      RecordAck ack = submit(rec, cred, now);
      hooks_.send(peer, WireMessage(MsgKind::RecordAck, payload_ack(ack)));
      break;
    }
    case MsgKind::RecordAck:
      break;  // client-side bookkeeping only
    case MsgKind::ProposeBlock:
      import_and_gossip(parse_block(msg.payload), peer, now);
      break;
    case MsgKind::ChainRequest: {
      const std::uint64_t from = parse_chain_request(msg.payload);
      auto chain = store_.canonical_chain();
      std::vector<LedgerBlock> slice;
      for (const auto& b : chain)
        if (b.height >= from) slice.push_back(b);
      hooks_.send(peer, WireMessage(MsgKind::ChainResponse, payload_chain_response(slice)));
      break;
    }
    case MsgKind::ChainResponse: {
      for (const auto& b : parse_chain_response(msg.payload)) import_and_gossip(b, "", now);
      break;
    }
    case MsgKind::PeerHello: {
      PeerHello hello = parse_hello(msg.payload);
      if (hello.tip_height > store_.tip().height)
        hooks_.send(peer, WireMessage(MsgKind::ChainRequest, payload_chain_request(0)));
      break;
    }
    default:
      hooks_.log("ignoring unknown message kind " + std::to_string(msg.kind));
      break;
  }
}

void NodeCore::try_seal(double now) {
  if (sealer_index_ < 0) return;
  if (!config_.seal_empty && pending_.empty()) return;

  const std::uint64_t next_height = store_.tip().height + 1;
  const std::size_t n = authorities_.size();
  const std::size_t turn = static_cast<std::size_t>(next_height % n);
  const std::size_t rank = (static_cast<std::size_t>(sealer_index_) + n - turn) % n;
  // out-of-turn sealers wait proportionally longer, so a present in-turn
  // sealer always wins the height
  const double due = last_tip_change_ + config_.seal_interval_s * (1.0 + static_cast<double>(rank) / n);
  if (now < due) return;

  std::vector<ChainRecord> batch(pending_.begin(), pending_.end());
  LedgerBlock block = ledger::seal_block(&store_.tip(), std::move(batch), config_.node_id, authorities_,
                                         static_cast<std::int64_t>(now * 1000), /*enforce_turn=*/false);
  ++blocks_sealed_;
  import_and_gossip(block, "", now);
}

void NodeCore::on_tick(double now) {
  if (!started_) return;
  try_seal(now);
}

std::vector<std::string> NodeCore::metrics() const {
  std::vector<std::string> out;
  out.push_back("tip_height " + std::to_string(store_.tip().height));
  out.push_back("tip_weight " + std::to_string(store_.tip_weight()));
  out.push_back("pending_records " + std::to_string(pending_.size()));
  out.push_back("blocks_sealed " + std::to_string(blocks_sealed_));
  out.push_back("connected_peers " + std::to_string(connected_peers_.size()));
  return out;
}

std::vector<BenchRow> batch_bench(std::size_t max_decade, std::size_t batch_size, std::uint64_t seed) {
  using clock = std::chrono::steady_clock;
  std::mt19937_64 rng(seed);

  ledger::AuthoritySet set;
  ledger::Authority a;
  a.id = "bench";
  for (auto& b : a.key) b = static_cast<std::uint8_t>(rng());
  set.sealers.push_back(a);

  ledger::RecordStore store(set);
  store.import_block(ledger::make_genesis(set));

  std::vector<ledger::Uid> uids;
  std::vector<BenchRow> rows;
  std::size_t committed = 0;

  for (std::size_t decade = 1; decade <= max_decade; ++decade) {
    std::size_t target = 1;
    for (std::size_t i = 0; i < decade; ++i) target *= 10;

    const auto t0 = clock::now();
    while (committed < target) {
      const std::size_t n = std::min(batch_size, target - committed);
      std::vector<ChainRecord> batch;
      batch.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        ChainRecord r;
        for (auto& b : r.uid) b = static_cast<std::uint8_t>(rng());
        r.payload.resize(64);
        for (auto& b : r.payload) b = static_cast<std::uint8_t>(rng());
        r.submitter = "bench";
        r.submitted_at = static_cast<std::int64_t>(committed + i);
        uids.push_back(r.uid);
        batch.push_back(std::move(r));
      }
      store.import_block(ledger::seal_block(&store.tip(), std::move(batch), "bench", set,
                                            static_cast<std::int64_t>(committed), false));
      committed += n;
    }
    const double commit_secs = std::chrono::duration<double>(clock::now() - t0).count();

    const std::size_t fetches = 20000;
    const auto f0 = clock::now();
    std::size_t hits = 0;
    for (std::size_t i = 0; i < fetches; ++i) {
      const auto& uid = uids[rng() % uids.size()];
      hits += store.fetch(uid).payload.size() > 0 ? 1 : 0;
    }
    const double fetch_secs = std::chrono::duration<double>(clock::now() - f0).count();
    (void)hits;

    BenchRow row;
    row.store_size = target;
    // commit throughput covers only the records created this decade
    const std::size_t created = target - (decade == 1 ? 0 : target / 10);
    row.commit_tps = commit_secs > 0 ? static_cast<double>(created) / commit_secs : 0.0;
    row.fetch_tps = fetch_secs > 0 ? static_cast<double>(fetches) / fetch_secs : 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace arcseal::node
