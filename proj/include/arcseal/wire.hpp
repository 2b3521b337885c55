#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arcseal/bytes.hpp"
#include "arcseal/ledger.hpp"

namespace arcseal::node {

// ARCP frame: magic "ARCP" | kind u8 | length u32 LE | payload.
inline constexpr std::size_t kMaxFramePayload = 8 * 1024 * 1024;

enum class MsgKind : std::uint8_t {
  SubmitRecord = 1,
  RecordAck = 2,
  ProposeBlock = 3,
  ChainRequest = 4,
  ChainResponse = 5,
  PeerHello = 6,
};

struct WireMessage {
  std::uint8_t kind = 0;  // raw so unknown kinds survive transport
  std::vector<std::uint8_t> payload;

  WireMessage() = default;
  WireMessage(MsgKind k, std::vector<std::uint8_t> p) : kind(static_cast<std::uint8_t>(k)), payload(std::move(p)) {}
};

std::vector<std::uint8_t> encode_frame(const WireMessage& msg);

// Incremental decoder for stream transports. feed() never reads beyond the
// declared frame length; malformed input (bad magic, oversize length)
// throws, which drops the connection.
class FrameDecoder {
 public:
  std::vector<WireMessage> feed(std::span<const std::uint8_t> bytes);

 private:
  std::vector<std::uint8_t> buf_;
};

// Submitter credential: any authority key may mint one by MACing the
// submitter name; nodes verify against the named authority.
struct Credential {
  std::string submitter;
  std::uint16_t authority_index = 0;
  ledger::Digest mac{};

  void serialize(ByteWriter& w) const;
  static Credential deserialize(ByteReader& r);
};

Credential make_credential(const ledger::AuthoritySet& set, std::size_t authority_index,
                           const std::string& submitter);
bool verify_credential(const ledger::AuthoritySet& set, const Credential& cred);

enum class AckStatus : std::uint8_t { Accepted = 0, Duplicate = 1, Oversize = 2, Unauthorized = 3 };

struct RecordAck {
  ledger::Uid uid{};
  AckStatus status = AckStatus::Accepted;
  std::optional<std::uint64_t> height;
};

// payload builders / parsers
std::vector<std::uint8_t> payload_submit(const Credential& cred, const ledger::ChainRecord& rec);
void parse_submit(std::span<const std::uint8_t> payload, Credential& cred, ledger::ChainRecord& rec);

std::vector<std::uint8_t> payload_ack(const RecordAck& ack);
RecordAck parse_ack(std::span<const std::uint8_t> payload);

std::vector<std::uint8_t> payload_block(const ledger::LedgerBlock& block);
ledger::LedgerBlock parse_block(std::span<const std::uint8_t> payload);

std::vector<std::uint8_t> payload_chain_request(std::uint64_t from_height);
std::uint64_t parse_chain_request(std::span<const std::uint8_t> payload);

std::vector<std::uint8_t> payload_chain_response(std::span<const ledger::LedgerBlock> blocks);
std::vector<ledger::LedgerBlock> parse_chain_response(std::span<const std::uint8_t> payload);

struct PeerHello {
  std::string node_id;
  std::uint64_t tip_height = 0;
  ledger::Digest tip_hash{};
};

std::vector<std::uint8_t> payload_hello(const PeerHello& hello);
PeerHello parse_hello(std::span<const std::uint8_t> payload);

}  // namespace arcseal::node
