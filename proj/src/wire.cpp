#include "arcseal/wire.hpp"

#include <cstring>

#include "arcseal/error.hpp"

namespace arcseal::node {

std::vector<std::uint8_t> encode_frame(const WireMessage& msg) {
  ByteWriter w;
  w.raw("ARCP", 4);
  w.u8(msg.kind);
  w.u32(static_cast<std::uint32_t>(msg.payload.size()));
  w.raw(msg.payload.data(), msg.payload.size());
  return w.take();
}

std::vector<WireMessage> FrameDecoder::feed(std::span<const std::uint8_t> bytes) {
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
  std::vector<WireMessage> out;
  std::size_t pos = 0;
  while (buf_.size() - pos >= 9) {
    if (std::memcmp(buf_.data() + pos, "ARCP", 4) != 0)
      raise(ErrorCode::BadMagic, "bad frame magic");
    const std::uint8_t kind = buf_[pos + 4];
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(buf_[pos + 5 + i]) << (8 * i);
    if (len > kMaxFramePayload) raise(ErrorCode::Oversize, "frame length " + std::to_string(len));
    if (buf_.size() - pos - 9 < len) break;  // wait for the rest
    WireMessage msg;
    msg.kind = kind;
    msg.payload.assign(buf_.begin() + static_cast<std::ptrdiff_t>(pos + 9),
                       buf_.begin() + static_cast<std::ptrdiff_t>(pos + 9 + len));
    out.push_back(std::move(msg));
    pos += 9 + len;
  }
  buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(pos));
  return out;
}

void Credential::serialize(ByteWriter& w) const {
  w.str(submitter);
  w.u16(authority_index);
  w.fixed(mac);
}

Credential Credential::deserialize(ByteReader& r) {
  Credential c;
  c.submitter = r.str();
  c.authority_index = r.u16();
  c.mac = r.fixed<32>();
  return c;
}

namespace {
std::vector<std::uint8_t> credential_preimage(const std::string& submitter) {
  std::string msg = "arcseal-credential:" + submitter;
  return std::vector<std::uint8_t>(msg.begin(), msg.end());
}
}  // namespace

Credential make_credential(const ledger::AuthoritySet& set, std::size_t authority_index,
                           const std::string& submitter) {
  if (authority_index >= set.sealers.size()) raise(ErrorCode::Unauthorized, "authority index out of range");
  Credential c;
  c.submitter = submitter;
  c.authority_index = static_cast<std::uint16_t>(authority_index);
  const auto& key = set.sealers[authority_index].key;
  auto pre = credential_preimage(submitter);
  c.mac = ledger::hmac_sha256(std::span<const std::uint8_t>(key.data(), key.size()), pre);
  return c;
}

bool verify_credential(const ledger::AuthoritySet& set, const Credential& cred) {
  if (cred.authority_index >= set.sealers.size()) return false;
  const auto& key = set.sealers[cred.authority_index].key;
  auto pre = credential_preimage(cred.submitter);
  return ledger::hmac_sha256(std::span<const std::uint8_t>(key.data(), key.size()), pre) == cred.mac;
}

std::vector<std::uint8_t> payload_submit(const Credential& cred, const ledger::ChainRecord& rec) {
  ByteWriter w;
  cred.serialize(w);
  rec.serialize(w);
  return w.take();
}

void parse_submit(std::span<const std::uint8_t> payload, Credential& cred, ledger::ChainRecord& rec) {
  ByteReader r(payload);
  cred = Credential::deserialize(r);
  rec = ledger::ChainRecord::deserialize(r);
  if (!r.done()) raise(ErrorCode::TruncatedPayload, "trailing bytes in submit");
}

std::vector<std::uint8_t> payload_ack(const RecordAck& ack) {
  ByteWriter w;
  w.fixed(ack.uid);
  w.u8(static_cast<std::uint8_t>(ack.status));
  w.u8(ack.height.has_value() ? 1 : 0);
  w.u64(ack.height.value_or(0));
  return w.take();
}

RecordAck parse_ack(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  RecordAck ack;
  ack.uid = r.fixed<16>();
  ack.status = static_cast<AckStatus>(r.u8());
  const bool has_height = r.u8() != 0;
  const std::uint64_t h = r.u64();
  if (has_height) ack.height = h;
  return ack;
}

std::vector<std::uint8_t> payload_block(const ledger::LedgerBlock& block) { return block.serialize(); }

ledger::LedgerBlock parse_block(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  auto block = ledger::LedgerBlock::deserialize(r);
  if (!r.done()) raise(ErrorCode::TruncatedPayload, "trailing bytes in block");
  return block;
}

std::vector<std::uint8_t> payload_chain_request(std::uint64_t from_height) {
  ByteWriter w;
  w.u64(from_height);
  return w.take();
}

std::uint64_t parse_chain_request(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  return r.u64();
}

std::vector<std::uint8_t> payload_chain_response(std::span<const ledger::LedgerBlock> blocks) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(blocks.size()));
  for (const auto& b : blocks) {
    auto bytes = b.serialize();
    w.u32(static_cast<std::uint32_t>(bytes.size()));
    w.raw(bytes.data(), bytes.size());
  }
  return w.take();
}

std::vector<ledger::LedgerBlock> parse_chain_response(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  const std::uint32_t n = r.u32();
  std::vector<ledger::LedgerBlock> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t len = r.u32();
    ByteReader br(r.raw(len));
    out.push_back(ledger::LedgerBlock::deserialize(br));
  }
  return out;
}

std::vector<std::uint8_t> payload_hello(const PeerHello& hello) {
  ByteWriter w;
  w.str(hello.node_id);
  w.u64(hello.tip_height);
  w.fixed(hello.tip_hash);
  return w.take();
}

PeerHello parse_hello(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  PeerHello h;
  h.node_id = r.str();
  h.tip_height = r.u64();
  h.tip_hash = r.fixed<32>();
  return h;
}

}  // namespace arcseal::node
