#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace arcseal::ledger {

using Digest = std::array<std::uint8_t, 32>;

// FIPS 180-4 SHA-256. Streaming interface so large files can be hashed
// without buffering them whole.
class Sha256 {
 public:
  Sha256() { reset(); }
  void reset();
  void update(const void* data, std::size_t len);
  void update(std::span<const std::uint8_t> data) { update(data.data(), data.size()); }
  Digest finish();

 private:
  void compress(const std::uint8_t* block);
  std::array<std::uint32_t, 8> state_;
  std::array<std::uint8_t, 64> buf_;
  std::uint64_t total_ = 0;
  std::size_t buffered_ = 0;
};

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(const std::string& data);
Digest sha256_file(const std::string& path);

// HMAC-SHA256 (RFC 2104); the seal and credential MAC primitive.
Digest hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> message);

std::string digest_hex(const Digest& d);

}  // namespace arcseal::ledger
