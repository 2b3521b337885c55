#include "arcseal/bytes.hpp"

namespace arcseal {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  raise(ErrorCode::ParseError, std::string("bad hex digit '") + c + "'");
}
}  // namespace

std::string to_hex(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0xf]);
  }
  return out;
}

std::vector<std::uint8_t> from_hex(const std::string& hex) {
  if (hex.size() % 2 != 0) raise(ErrorCode::ParseError, "odd hex string length");
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>((hex_value(hex[2 * i]) << 4) | hex_value(hex[2 * i + 1]));
  }
  return out;
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::WindowOutOfRange: return "WindowOutOfRange";
    case ErrorCode::MediaInvalid: return "MediaInvalid";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::EmptyPositives: return "EmptyPositives";
    case ErrorCode::RecordTooLarge: return "RecordTooLarge";
    case ErrorCode::ModelHashMismatch: return "ModelHashMismatch";
    case ErrorCode::BlockCountMismatch: return "BlockCountMismatch";
    case ErrorCode::MissingRecord: return "MissingRecord";
    case ErrorCode::NotInTurn: return "NotInTurn";
    case ErrorCode::DuplicateUid: return "DuplicateUid";
    case ErrorCode::BadParent: return "BadParent";
    case ErrorCode::BadSeal: return "BadSeal";
    case ErrorCode::UnauthorizedSealer: return "UnauthorizedSealer";
    case ErrorCode::BadRoot: return "BadRoot";
    case ErrorCode::Oversize: return "Oversize";
    case ErrorCode::DisjointGenesis: return "DisjointGenesis";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::Unauthorized: return "Unauthorized";
  }
  return "UnknownError";
}

}  // namespace arcseal
