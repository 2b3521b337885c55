#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "arcseal/error.hpp"

namespace arcseal {

// Little-endian append-only byte sink used for every canonical serialization
// in the project (containers, model files, records, blocks, wire frames).
class ByteWriter {
 public:
  const std::vector<std::uint8_t>& bytes() const noexcept { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }
  std::size_t size() const noexcept { return buf_.size(); }

  void raw(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    buf_.insert(buf_.end(), p, p + n);
  }
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) { le(v); }
  void u32(std::uint32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void i16(std::int16_t v) { le(static_cast<std::uint16_t>(v)); }
  void i64(std::int64_t v) { le(static_cast<std::uint64_t>(v)); }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    le(bits);
  }
  template <std::size_t N>
  void fixed(const std::array<std::uint8_t, N>& a) {
    raw(a.data(), N);
  }
  void str(const std::string& s) {
    u16(static_cast<std::uint16_t>(s.size()));
    raw(s.data(), s.size());
  }

 private:
  template <typename T>
  void le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> buf_;
};

// Bounds-checked reader; every accessor throws TruncatedPayload instead of
// reading past the declared end.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  bool done() const noexcept { return pos_ == data_.size(); }

  std::span<const std::uint8_t> raw(std::size_t n) {
    need(n);
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint8_t u8() { return raw(1)[0]; }
  std::uint16_t u16() { return le<std::uint16_t>(); }
  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::uint64_t u64() { return le<std::uint64_t>(); }
  std::int16_t i16() { return static_cast<std::int16_t>(le<std::uint16_t>()); }
  std::int64_t i64() { return static_cast<std::int64_t>(le<std::uint64_t>()); }
  double f64() {
    std::uint64_t bits = le<std::uint64_t>();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  template <std::size_t N>
  std::array<std::uint8_t, N> fixed() {
    auto s = raw(N);
    std::array<std::uint8_t, N> a;
    std::memcpy(a.data(), s.data(), N);
    return a;
  }
  std::string str() {
    std::size_t n = u16();
    auto s = raw(n);
    return std::string(reinterpret_cast<const char*>(s.data()), n);
  }
  void expect_magic(const char (&magic)[5]) {
    auto s = raw(4);
    if (std::memcmp(s.data(), magic, 4) != 0) raise(ErrorCode::BadMagic, std::string("expected ") + magic);
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) raise(ErrorCode::TruncatedPayload, "short read");
  }
  template <typename T>
  T le() {
    auto s = raw(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(s[i]) << (8 * i);
    return v;
  }
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(const std::string& hex);

}  // namespace arcseal
