#include "arcseal/ledger.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "arcseal/error.hpp"

namespace arcseal::ledger {

std::string uid_hex(const Uid& uid) { return to_hex(std::span<const std::uint8_t>(uid.data(), uid.size())); }

Uid uid_from_hex(const std::string& hex) {
  auto bytes = from_hex(hex);
  if (bytes.size() != 16) raise(ErrorCode::ParseError, "uid must be 16 bytes");
  Uid uid;
  std::memcpy(uid.data(), bytes.data(), 16);
  return uid;
}

void ChainRecord::serialize(ByteWriter& w) const {
  w.fixed(uid);
  w.str(submitter);
  w.i64(submitted_at);
  w.u32(static_cast<std::uint32_t>(payload.size()));
  w.raw(payload.data(), payload.size());
}

ChainRecord ChainRecord::deserialize(ByteReader& r) {
  ChainRecord rec;
  rec.uid = r.fixed<16>();
  rec.submitter = r.str();
  rec.submitted_at = r.i64();
  const std::uint32_t n = r.u32();
  auto payload = r.raw(n);
  rec.payload.assign(payload.begin(), payload.end());
  return rec;
}

std::vector<std::uint8_t> ChainRecord::bytes() const {
  ByteWriter w;
  serialize(w);
  return w.take();
}

std::size_t ChainRecord::serialized_size() const {
  return 16 + 2 + submitter.size() + 8 + 4 + payload.size();
}

Digest merkle_root(const std::vector<ChainRecord>& records) {
  if (records.empty()) return sha256(std::string{});
  std::vector<Digest> level;
  level.reserve(records.size());
  for (const ChainRecord& r : records) level.push_back(sha256(r.bytes()));
  while (level.size() > 1) {
    if (level.size() % 2 != 0) level.push_back(level.back());
    std::vector<Digest> next;
    next.reserve(level.size() / 2);
    for (std::size_t i = 0; i < level.size(); i += 2) {
      Sha256 h;
      h.update(level[i].data(), level[i].size());
      h.update(level[i + 1].data(), level[i + 1].size());
      next.push_back(h.finish());
    }
    level = std::move(next);
  }
  return level[0];
}

int AuthoritySet::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < sealers.size(); ++i)
    if (sealers[i].id == id) return static_cast<int>(i);
  return -1;
}

const Authority* AuthoritySet::find(const std::string& id) const {
  const int i = index_of(id);
  return i < 0 ? nullptr : &sealers[static_cast<std::size_t>(i)];
}

bool AuthoritySet::in_turn(std::uint64_t height, const std::string& id) const {
  if (sealers.empty()) return false;
  return index_of(id) == static_cast<int>(height % sealers.size());
}

std::vector<std::uint8_t> LedgerBlock::seal_preimage() const {
  ByteWriter w;
  w.u64(height);
  w.fixed(parent_hash);
  w.i64(timestamp);
  w.str(sealer_id);
  w.fixed(records_root);
  return w.take();
}

std::vector<std::uint8_t> LedgerBlock::serialize() const {
  ByteWriter w;
  w.u64(height);
  w.fixed(parent_hash);
  w.i64(timestamp);
  w.str(sealer_id);
  w.fixed(records_root);
  w.u32(static_cast<std::uint32_t>(records.size()));
  for (const ChainRecord& r : records) r.serialize(w);
  w.fixed(seal);
  return w.take();
}

LedgerBlock LedgerBlock::deserialize(ByteReader& r) {
  LedgerBlock b;
  b.height = r.u64();
  b.parent_hash = r.fixed<32>();
  b.timestamp = r.i64();
  b.sealer_id = r.str();
  b.records_root = r.fixed<32>();
  const std::uint32_t n = r.u32();
  b.records.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) b.records.push_back(ChainRecord::deserialize(r));
  b.seal = r.fixed<32>();
  return b;
}

Digest LedgerBlock::hash() const { return sha256(serialize()); }

namespace {

Digest compute_seal(const LedgerBlock& block, const AuthorityKey& key) {
  auto preimage = block.seal_preimage();
  return hmac_sha256(std::span<const std::uint8_t>(key.data(), key.size()), preimage);
}

}  // namespace

LedgerBlock make_genesis(const AuthoritySet& authorities) {
  if (authorities.sealers.empty()) raise(ErrorCode::UnauthorizedSealer, "empty authority set");
  LedgerBlock genesis;
  genesis.height = 0;
  genesis.parent_hash = Digest{};
  genesis.timestamp = 0;
  genesis.sealer_id = authorities.sealers[0].id;  // in turn: 0 mod n
  genesis.records_root = merkle_root(genesis.records);
  genesis.seal = compute_seal(genesis, authorities.sealers[0].key);
  return genesis;
}

LedgerBlock seal_block(const LedgerBlock* parent, std::vector<ChainRecord> records,
                       const std::string& sealer_id, const AuthoritySet& authorities,
                       std::int64_t now, bool enforce_turn) {
  const Authority* sealer = authorities.find(sealer_id);
  if (!sealer) raise(ErrorCode::UnauthorizedSealer, sealer_id);
  const std::uint64_t height = parent ? parent->height + 1 : 0;
  if (enforce_turn && !authorities.in_turn(height, sealer_id))
    raise(ErrorCode::NotInTurn, sealer_id + " at height " + std::to_string(height));

  std::unordered_map<std::string, bool> seen;
  for (const ChainRecord& r : records) {
    if (r.serialized_size() > kMaxRecordBytes)
      raise(ErrorCode::RecordTooLarge, std::to_string(r.serialized_size()) + " bytes");
    if (!seen.emplace(uid_hex(r.uid), true).second) raise(ErrorCode::DuplicateUid, uid_hex(r.uid));
  }

  LedgerBlock block;
  block.height = height;
  block.parent_hash = parent ? parent->hash() : Digest{};
  block.timestamp = parent ? std::max(now, parent->timestamp) : now;
  block.sealer_id = sealer_id;
  block.records = std::move(records);
  block.records_root = merkle_root(block.records);
  block.seal = compute_seal(block, sealer->key);
  return block;
}

void validate_block(const LedgerBlock* parent, const LedgerBlock& block,
                    const AuthoritySet& authorities,
                    const std::unordered_map<std::string, std::uint64_t>& used_uids) {
  if (parent == nullptr) {
    if (block.height != 0) raise(ErrorCode::BadParent, "genesis must have height 0");
    if (block.parent_hash != Digest{}) raise(ErrorCode::BadParent, "genesis parent hash must be zero");
  } else {
    if (block.parent_hash != parent->hash()) raise(ErrorCode::BadParent, "parent hash mismatch");
    if (block.height != parent->height + 1) raise(ErrorCode::BadParent, "height must increment");
    if (block.timestamp < parent->timestamp) raise(ErrorCode::BadParent, "timestamp before parent");
  }

  const Authority* sealer = authorities.find(block.sealer_id);
  if (!sealer) raise(ErrorCode::UnauthorizedSealer, block.sealer_id);
  if (compute_seal(block, sealer->key) != block.seal) raise(ErrorCode::BadSeal, block.sealer_id);
  if (merkle_root(block.records) != block.records_root) raise(ErrorCode::BadRoot, "records root mismatch");

  std::unordered_map<std::string, bool> in_block;
  for (const ChainRecord& r : block.records) {
    if (r.serialized_size() > kMaxRecordBytes)
      raise(ErrorCode::Oversize, std::to_string(r.serialized_size()) + " bytes");
    const std::string key = uid_hex(r.uid);
    if (used_uids.count(key) != 0 || !in_block.emplace(key, true).second)
      raise(ErrorCode::DuplicateUid, key);
  }
}

std::uint64_t block_weight(const LedgerBlock& block, const AuthoritySet& authorities) {
  return authorities.in_turn(block.height, block.sealer_id) ? 2 : 1;
}

std::uint64_t chain_weight(const std::vector<LedgerBlock>& chain, const AuthoritySet& authorities) {
  std::uint64_t w = 0;
  for (const LedgerBlock& b : chain) w += block_weight(b, authorities);
  return w;
}

const std::vector<LedgerBlock>& fork_choice(const std::vector<LedgerBlock>& a,
                                            const std::vector<LedgerBlock>& b,
                                            const AuthoritySet& authorities) {
  if (a.empty() || b.empty() || a.front().hash() != b.front().hash())
    raise(ErrorCode::DisjointGenesis, "chains do not share a genesis");
  const std::uint64_t wa = chain_weight(a, authorities);
  const std::uint64_t wb = chain_weight(b, authorities);
  if (wa != wb) return wa > wb ? a : b;
  // tie: lexicographically lower tip hash wins
  const Digest ha = a.back().hash(), hb = b.back().hash();
  return ha <= hb ? a : b;
}

RecordStore::RecordStore(AuthoritySet authorities, std::string log_path)
    : authorities_(std::move(authorities)), log_path_(std::move(log_path)) {}

bool RecordStore::import_block(const LedgerBlock& block) {
  const Digest h = block.hash();
  const std::string key = to_hex(std::span<const std::uint8_t>(h.data(), h.size()));
  if (blocks_.count(key) != 0) return false;  // already known

  const Node* parent = nullptr;
  std::string parent_key;
  if (block.height > 0) {
    parent_key = to_hex(std::span<const std::uint8_t>(block.parent_hash.data(), block.parent_hash.size()));
    auto it = blocks_.find(parent_key);
    if (it == blocks_.end()) raise(ErrorCode::BadParent, "unknown parent " + parent_key.substr(0, 12));
    parent = &it->second;
  } else if (!genesis_key_.empty() && genesis_key_ != key) {
    raise(ErrorCode::DisjointGenesis, "second genesis rejected");
  }

  // uid uniqueness is judged along this block's own ancestor chain
  if (parent != nullptr && parent_key == tip_key_) {
    std::unordered_map<std::string, std::uint64_t> used;
    used.reserve(uid_index_.size());
    for (const auto& [uid, entry] : uid_index_) used.emplace(uid, entry.height);
    validate_block(&parent->block, block, authorities_, used);
  } else {
    std::unordered_map<std::string, std::uint64_t> used;
    const Node* walk = parent;
    while (walk != nullptr) {
      for (const ChainRecord& r : walk->block.records) used.emplace(uid_hex(r.uid), walk->block.height);
      if (walk->block.height == 0) break;
      const std::string pk =
          to_hex(std::span<const std::uint8_t>(walk->parent.data(), walk->parent.size()));
      auto it = blocks_.find(pk);
      walk = it == blocks_.end() ? nullptr : &it->second;
    }
    validate_block(parent ? &parent->block : nullptr, block, authorities_, used);
  }

  Node node;
  node.block = block;
  node.hash = h;
  node.parent = block.parent_hash;
  node.total_weight = (parent ? parent->total_weight : 0) + block_weight(block, authorities_);
  blocks_.emplace(key, std::move(node));
  if (block.height == 0) genesis_key_ = key;

  append_to_log(block);

  bool tip_changed = false;
  if (tip_key_.empty()) {
    tip_key_ = key;
    tip_changed = true;
  } else {
    const Node& cur = blocks_.at(tip_key_);
    const Node& cand = blocks_.at(key);
    if (cand.total_weight > cur.total_weight ||
        (cand.total_weight == cur.total_weight && cand.hash < cur.hash)) {
      tip_changed = key != tip_key_;
      tip_key_ = key;
    }
  }

  if (tip_changed) {
    if (parent != nullptr && !uid_index_.empty() && parent_key == previous_tip_for_index_) {
      // fast path: tip extended, index grows incrementally
      for (std::size_t i = 0; i < block.records.size(); ++i)
        uid_index_.emplace(uid_hex(block.records[i].uid), UidEntry{key, i, block.height});
      previous_tip_for_index_ = key;
    } else {
      index_canonical();
    }
  }
  return tip_changed;
}

void RecordStore::index_canonical() {
  uid_index_.clear();
  const Node* walk = tip_key_.empty() ? nullptr : &blocks_.at(tip_key_);
  std::string walk_key = tip_key_;
  while (walk != nullptr) {
    for (std::size_t i = 0; i < walk->block.records.size(); ++i)
      uid_index_.emplace(uid_hex(walk->block.records[i].uid), UidEntry{walk_key, i, walk->block.height});
    if (walk->block.height == 0) break;
    walk_key = to_hex(std::span<const std::uint8_t>(walk->parent.data(), walk->parent.size()));
    auto it = blocks_.find(walk_key);
    walk = it == blocks_.end() ? nullptr : &it->second;
  }
  previous_tip_for_index_ = tip_key_;
}

const LedgerBlock& RecordStore::tip() const {
  if (tip_key_.empty()) raise(ErrorCode::NotFound, "empty chain");
  return blocks_.at(tip_key_).block;
}

std::uint64_t RecordStore::tip_weight() const {
  if (tip_key_.empty()) return 0;
  return blocks_.at(tip_key_).total_weight;
}

std::vector<LedgerBlock> RecordStore::canonical_chain() const {
  std::vector<LedgerBlock> chain;
  if (tip_key_.empty()) return chain;
  const Node* walk = &blocks_.at(tip_key_);
  while (true) {
    chain.push_back(walk->block);
    if (walk->block.height == 0) break;
    const std::string pk = to_hex(std::span<const std::uint8_t>(walk->parent.data(), walk->parent.size()));
    auto it = blocks_.find(pk);
    if (it == blocks_.end()) break;
    walk = &it->second;
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

bool RecordStore::contains_uid(const Uid& uid) const { return uid_index_.count(uid_hex(uid)) != 0; }

const ChainRecord& RecordStore::fetch(const Uid& uid) const {
  auto it = uid_index_.find(uid_hex(uid));
  if (it == uid_index_.end()) raise(ErrorCode::NotFound, uid_hex(uid));
  return blocks_.at(it->second.block_key).block.records[it->second.record_index];
}

std::optional<std::uint64_t> RecordStore::height_of(const Uid& uid) const {
  auto it = uid_index_.find(uid_hex(uid));
  if (it == uid_index_.end()) return std::nullopt;
  return it->second.height;
}

void RecordStore::append_to_log(const LedgerBlock& block) {
  if (log_path_.empty()) return;
  std::ofstream out(log_path_, std::ios::binary | std::ios::app);
  if (!out) raise(ErrorCode::IoError, "cannot append to " + log_path_);
  auto bytes = block.serialize();
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(bytes.size()));
  w.raw(bytes.data(), bytes.size());
  auto framed = w.take();
  out.write(reinterpret_cast<const char*>(framed.data()), static_cast<std::streamsize>(framed.size()));
}

void RecordStore::load_log() {
  if (log_path_.empty()) return;
  std::ifstream in(log_path_, std::ios::binary);
  if (!in) return;  // no log yet
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string saved = std::exchange(log_path_, "");  // suppress re-append during replay
  ByteReader r(bytes);
  while (!r.done()) {
    const std::uint32_t len = r.u32();
    ByteReader br(r.raw(len));
    import_block(LedgerBlock::deserialize(br));
  }
  log_path_ = saved;
}

void RecordStore::flush() {
  // appends are unbuffered per block; nothing further to do
}

}  // namespace arcseal::ledger
