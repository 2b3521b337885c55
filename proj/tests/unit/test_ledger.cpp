#include <doctest.h>

#include <cstdio>
#include <random>

#include "arcseal/ledger.hpp"

using namespace arcseal;
using namespace arcseal::ledger;

namespace {

AuthoritySet make_authorities(int n) {
  AuthoritySet set;
  for (int i = 0; i < n; ++i) {
    Authority a;
    a.id = "archive-" + std::to_string(i);
    for (int k = 0; k < 32; ++k) a.key[k] = static_cast<std::uint8_t>(i * 31 + k * 7 + 1);
    set.sealers.push_back(a);
  }
  return set;
}

ChainRecord make_record(std::uint64_t n, std::size_t payload_size = 40) {
  ChainRecord r;
  std::mt19937_64 rng(n * 1234567 + 1);
  for (auto& b : r.uid) b = static_cast<std::uint8_t>(rng());
  r.payload.resize(payload_size);
  for (auto& b : r.payload) b = static_cast<std::uint8_t>(rng());
  r.submitter = "client";
  r.submitted_at = static_cast<std::int64_t>(n);
  return r;
}

// grows a simple chain with the in-turn sealer at every height
std::vector<LedgerBlock> grow_chain(const AuthoritySet& set, std::size_t heights,
                                    std::uint64_t record_seed = 1000) {
  std::vector<LedgerBlock> chain{make_genesis(set)};
  for (std::size_t h = 1; h <= heights; ++h) {
    const auto& sealer = set.sealers[h % set.size()];
    chain.push_back(seal_block(&chain.back(), {make_record(record_seed + h)}, sealer.id, set,
                               static_cast<std::int64_t>(h)));
  }
  return chain;
}

}  // namespace

TEST_SUITE("ledger") {

TEST_CASE("merkle root base cases") {
  CHECK(digest_hex(merkle_root({})) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");  // sha256("")
  ChainRecord r = make_record(1);
  CHECK(merkle_root({r}) == sha256(r.bytes()));  // single leaf promotes
}

TEST_CASE("merkle root of four records matches hand-built tree") {
  std::vector<ChainRecord> recs = {make_record(1), make_record(2), make_record(3), make_record(4)};
  auto pair_hash = [](const Digest& a, const Digest& b) {
    Sha256 h;
    h.update(a.data(), a.size());
    h.update(b.data(), b.size());
    return h.finish();
  };
  Digest l0 = sha256(recs[0].bytes()), l1 = sha256(recs[1].bytes());
  Digest l2 = sha256(recs[2].bytes()), l3 = sha256(recs[3].bytes());
  Digest want = pair_hash(pair_hash(l0, l1), pair_hash(l2, l3));
  CHECK(merkle_root(recs) == want);
}

TEST_CASE("merkle odd level duplicates the last node") {
  std::vector<ChainRecord> recs = {make_record(1), make_record(2), make_record(3)};
  auto pair_hash = [](const Digest& a, const Digest& b) {
    Sha256 h;
    h.update(a.data(), a.size());
    h.update(b.data(), b.size());
    return h.finish();
  };
  Digest l0 = sha256(recs[0].bytes()), l1 = sha256(recs[1].bytes()), l2 = sha256(recs[2].bytes());
  Digest want = pair_hash(pair_hash(l0, l1), pair_hash(l2, l2));
  CHECK(merkle_root(recs) == want);
}

TEST_CASE("genesis is height 0 sealed by authority 0") {
  AuthoritySet set = make_authorities(3);
  LedgerBlock g = make_genesis(set);
  CHECK(g.height == 0);
  CHECK(g.parent_hash == Digest{});
  CHECK(g.sealer_id == "archive-0");
  CHECK_NOTHROW(validate_block(nullptr, g, set, {}));
}

TEST_CASE("in-turn schedule: height 7 with 3 sealers is sealer 1") {
  AuthoritySet set = make_authorities(3);
  CHECK(set.in_turn(7, "archive-1"));
  CHECK(!set.in_turn(7, "archive-0"));
  LedgerBlock g = make_genesis(set);
  CHECK_THROWS_AS(seal_block(&g, {}, "archive-0", set, 1), Error);  // NotInTurn at height 1
  CHECK_NOTHROW(seal_block(&g, {}, "archive-1", set, 1));
  CHECK_NOTHROW(seal_block(&g, {}, "archive-0", set, 1, /*enforce_turn=*/false));
}

TEST_CASE("records above 32 KB are rejected at seal") {
  AuthoritySet set = make_authorities(3);
  LedgerBlock g = make_genesis(set);
  ChainRecord big = make_record(1, 33 * 1024);
  bool threw = false;
  try {
    seal_block(&g, {big}, "archive-1", set, 1);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == ErrorCode::RecordTooLarge);
  }
  CHECK(threw);
}

TEST_CASE("block validation catches each tamper class") {
  AuthoritySet set = make_authorities(3);
  auto chain = grow_chain(set, 3);
  const LedgerBlock& parent = chain[2];
  LedgerBlock good = chain[3];
  CHECK_NOTHROW(validate_block(&parent, good, set, {}));

  LedgerBlock flipped = good;
  flipped.records[0].payload[0] ^= 0x01;
  bool threw = false;
  try {
    validate_block(&parent, flipped, set, {});
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == ErrorCode::BadRoot);
  }
  CHECK(threw);

  LedgerBlock unsealed = good;
  unsealed.sealer_id = "intruder";
  CHECK_THROWS_AS(validate_block(&parent, unsealed, set, {}), Error);

  // seal computed under a key outside the authority set
  AuthoritySet rogue = make_authorities(3);
  rogue.sealers[0].key[0] ^= 0xFF;
  LedgerBlock bad_seal = seal_block(&parent, {}, "archive-0", rogue, 5, false);
  threw = false;
  try {
    validate_block(&parent, bad_seal, set, {});
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == ErrorCode::BadSeal);
  }
  CHECK(threw);

  LedgerBlock wrong_parent = good;
  wrong_parent.parent_hash[0] ^= 0x01;
  CHECK_THROWS_AS(validate_block(&parent, wrong_parent, set, {}), Error);

  std::unordered_map<std::string, std::uint64_t> used;
  used.emplace(uid_hex(good.records[0].uid), 1);
  threw = false;
  try {
    validate_block(&parent, good, set, used);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == ErrorCode::DuplicateUid);
  }
  CHECK(threw);
}

TEST_CASE("chain integrity: any byte flip invalidates the containing block") {
  AuthoritySet set = make_authorities(3);
  auto chain = grow_chain(set, 5);
  // serialize then reload and revalidate the whole chain
  for (std::size_t mutate_at : {1u, 3u, 5u}) {
    auto copy = chain;
    auto bytes = copy[mutate_at].serialize();
    bytes[bytes.size() / 2] ^= 0x01;
    ByteReader r(bytes);
    LedgerBlock mutated = LedgerBlock::deserialize(r);
    bool ok = true;
    try {
      validate_block(&copy[mutate_at - 1], mutated, set, {});
      // even if the block itself still validates (seal fields mutated
      // consistently is impossible without the key), the child must break
      validate_block(&mutated, copy[mutate_at + 1 < copy.size() ? mutate_at + 1 : mutate_at], set, {});
      ok = mutate_at + 1 < copy.size() ? false : ok;
    } catch (const Error&) {
      ok = false;
    }
    CHECK(!ok);
  }
}

TEST_CASE("fork choice prefers in-turn weight, then lower tip hash") {
  AuthoritySet set = make_authorities(3);
  auto base = grow_chain(set, 2);

  // chain A: one more in-turn block (weight 2)
  auto chain_a = base;
  chain_a.push_back(seal_block(&chain_a.back(), {make_record(50)}, set.sealers[3 % 3].id, set, 10));
  // chain B: one more out-of-turn block (weight 1)
  auto chain_b = base;
  chain_b.push_back(
      seal_block(&chain_b.back(), {make_record(51)}, set.sealers[(3 + 1) % 3].id, set, 10, false));

  CHECK(&fork_choice(chain_a, chain_b, set) == &chain_a);
  CHECK(&fork_choice(chain_b, chain_a, set) == &chain_a);

  // longer all-in-turn chain wins
  auto longer = grow_chain(set, 4);
  auto shorter = grow_chain(set, 3);
  CHECK(&fork_choice(longer, shorter, set) == &longer);

  // identical chains: the tie rule degenerates to either side (same tip)
  auto same = grow_chain(set, 3);
  CHECK(fork_choice(same, shorter, set).back().hash() == shorter.back().hash());

  // equal weight, different tips: lower tip hash wins both ways
  auto tie_a = base;
  tie_a.push_back(seal_block(&tie_a.back(), {make_record(60)}, set.sealers[0].id, set, 10));
  auto tie_b = base;
  tie_b.push_back(seal_block(&tie_b.back(), {make_record(61)}, set.sealers[0].id, set, 10));
  const auto& pick1 = fork_choice(tie_a, tie_b, set);
  const auto& pick2 = fork_choice(tie_b, tie_a, set);
  CHECK(pick1.back().hash() == pick2.back().hash());

  AuthoritySet other = make_authorities(3);
  for (auto& s : other.sealers) s.id = "rogue-" + s.id;
  auto disjoint = grow_chain(other, 2);
  CHECK_THROWS_AS(fork_choice(chain_a, disjoint, set), Error);
}

TEST_CASE("record store: import, fetch, duplicate uid rejection") {
  AuthoritySet set = make_authorities(3);
  RecordStore store(set);
  store.import_block(make_genesis(set));

  ChainRecord r1 = make_record(7);
  LedgerBlock b1 = seal_block(&store.tip(), {r1}, "archive-1", set, 1);
  CHECK(store.import_block(b1));
  CHECK(store.fetch(r1.uid) == r1);
  CHECK(store.height_of(r1.uid) == 1);

  Uid missing{};
  bool threw = false;
  try {
    store.fetch(missing);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == ErrorCode::NotFound);
  }
  CHECK(threw);

  // a replayed uid cannot be committed again
  LedgerBlock b2 = seal_block(&store.tip(), {r1}, "archive-2", set, 2);
  CHECK_THROWS_AS(store.import_block(b2), Error);
}

TEST_CASE("record store reorganizes to the heavier fork") {
  AuthoritySet set = make_authorities(3);
  RecordStore store(set);
  LedgerBlock genesis = make_genesis(set);
  store.import_block(genesis);

  // light branch: out-of-turn block
  ChainRecord light_rec = make_record(100);
  LedgerBlock light = seal_block(&genesis, {light_rec}, "archive-2", set, 1, false);
  store.import_block(light);
  CHECK(store.tip().hash() == light.hash());
  CHECK(store.contains_uid(light_rec.uid));

  // heavy branch: in-turn block then another
  ChainRecord heavy_rec = make_record(101);
  LedgerBlock heavy1 = seal_block(&genesis, {heavy_rec}, "archive-1", set, 1);
  store.import_block(heavy1);
  LedgerBlock heavy2 = seal_block(&heavy1, {}, "archive-2", set, 2);
  CHECK(store.import_block(heavy2));

  CHECK(store.tip().hash() == heavy2.hash());
  CHECK(store.contains_uid(heavy_rec.uid));
  CHECK(!store.contains_uid(light_rec.uid));  // light branch no longer canonical
}

TEST_CASE("append-only log restores the chain") {
  AuthoritySet set = make_authorities(3);
  const std::string path = "/tmp/arcseal_test_chain.log";
  std::remove(path.c_str());
  ChainRecord r = make_record(55);
  {
    RecordStore store(set, path);
    store.import_block(make_genesis(set));
    store.import_block(seal_block(&store.tip(), {r}, "archive-1", set, 1));
    store.import_block(seal_block(&store.tip(), {make_record(56)}, "archive-2", set, 2));
    store.flush();
  }
  RecordStore restored(set, path);
  restored.load_log();
  CHECK(restored.tip().height == 2);
  CHECK(restored.fetch(r.uid) == r);
  std::remove(path.c_str());
}

TEST_CASE("block serialization roundtrips") {
  AuthoritySet set = make_authorities(5);
  auto chain = grow_chain(set, 4);
  for (const LedgerBlock& b : chain) {
    auto bytes = b.serialize();
    ByteReader r(bytes);
    LedgerBlock back = LedgerBlock::deserialize(r);
    CHECK(back == b);
    CHECK(back.serialize() == bytes);
  }
}

}  // TEST_SUITE
