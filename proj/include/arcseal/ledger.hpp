#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "arcseal/bytes.hpp"
#include "arcseal/sha256.hpp"

namespace arcseal::ledger {

using Uid = std::array<std::uint8_t, 16>;
using AuthorityKey = std::array<std::uint8_t, 32>;

inline constexpr std::size_t kMaxRecordBytes = 32768;  // per-transaction cap

std::string uid_hex(const Uid& uid);
Uid uid_from_hex(const std::string& hex);

struct ChainRecord {
  Uid uid{};
  std::vector<std::uint8_t> payload;
  std::string submitter;
  std::int64_t submitted_at = 0;

  void serialize(ByteWriter& w) const;
  static ChainRecord deserialize(ByteReader& r);
  std::vector<std::uint8_t> bytes() const;
  std::size_t serialized_size() const;
  bool operator==(const ChainRecord&) const = default;
};

// Merkle root over record bytes; odd levels duplicate the last node, a lone
// leaf promotes, and the empty list commits to sha256("").
Digest merkle_root(const std::vector<ChainRecord>& records);

struct Authority {
  std::string id;
  AuthorityKey key{};
};

struct AuthoritySet {
  std::vector<Authority> sealers;

  std::size_t size() const { return sealers.size(); }
  std::size_t majority() const { return sealers.size() / 2 + 1; }
  int index_of(const std::string& id) const;
  const Authority* find(const std::string& id) const;
  // round-robin schedule: the in-turn sealer for height h is h mod n
  bool in_turn(std::uint64_t height, const std::string& id) const;
};

struct LedgerBlock {
  std::uint64_t height = 0;
  Digest parent_hash{};
  std::int64_t timestamp = 0;
  std::string sealer_id;
  Digest records_root{};
  std::vector<ChainRecord> records;
  Digest seal{};  // HMAC-SHA256 over the header fields under the sealer key

  std::vector<std::uint8_t> seal_preimage() const;
  std::vector<std::uint8_t> serialize() const;
  static LedgerBlock deserialize(ByteReader& r);
  Digest hash() const;  // sha256 of the full serialization
  bool operator==(const LedgerBlock&) const = default;
};

LedgerBlock make_genesis(const AuthoritySet& authorities);

// Seals pending records on top of `parent` (null for genesis). The sealer
// must be authorized; `enforce_turn` requires it to be exactly in-turn.
LedgerBlock seal_block(const LedgerBlock* parent, std::vector<ChainRecord> records,
                       const std::string& sealer_id, const AuthoritySet& authorities,
                       std::int64_t now, bool enforce_turn = true);

// Full validation of `block` as a child of `parent`; `used_uids` holds every
// uid already committed on that chain. Throws on the first violation.
void validate_block(const LedgerBlock* parent, const LedgerBlock& block,
                    const AuthoritySet& authorities,
                    const std::unordered_map<std::string, std::uint64_t>& used_uids);

// Clique-style weights: in-turn blocks count 2, out-of-turn 1.
std::uint64_t block_weight(const LedgerBlock& block, const AuthoritySet& authorities);
std::uint64_t chain_weight(const std::vector<LedgerBlock>& chain, const AuthoritySet& authorities);

// Returns the preferred chain: higher total weight, ties to the
// lexicographically lower tip hash. Chains must share a genesis.
const std::vector<LedgerBlock>& fork_choice(const std::vector<LedgerBlock>& a,
                                            const std::vector<LedgerBlock>& b,
                                            const AuthoritySet& authorities);

// Canonical-chain store: validated block tree, fork-choice tracked tip, uid
// index over the canonical chain, optional append-only log persistence.
class RecordStore {
 public:
  explicit RecordStore(AuthoritySet authorities, std::string log_path = "");

  // Imports a block whose parent must already be known. Returns true when
  // the canonical tip changed.
  bool import_block(const LedgerBlock& block);

  const LedgerBlock& tip() const;
  std::uint64_t tip_weight() const;
  std::vector<LedgerBlock> canonical_chain() const;
  const AuthoritySet& authorities() const { return authorities_; }

  bool contains_uid(const Uid& uid) const;
  const ChainRecord& fetch(const Uid& uid) const;  // NotFound when absent
  std::optional<std::uint64_t> height_of(const Uid& uid) const;

  std::size_t block_count() const { return blocks_.size(); }

  // Reloads every block from the append-only log (startup path).
  void load_log();
  void flush();

 private:
  struct Node {
    LedgerBlock block;
    Digest hash;
    std::uint64_t total_weight = 0;
    Digest parent;
  };

  void index_canonical();
  void append_to_log(const LedgerBlock& block);

  AuthoritySet authorities_;
  std::string log_path_;
  std::unordered_map<std::string, Node> blocks_;  // key: hex block hash
  std::string tip_key_;
  std::string genesis_key_;
  std::string previous_tip_for_index_;
  // canonical-chain uid index: uid hex -> (block key, record position, height)
  struct UidEntry {
    std::string block_key;
    std::size_t record_index;
    std::uint64_t height;
  };
  std::unordered_map<std::string, UidEntry> uid_index_;
};

}  // namespace arcseal::ledger
