#include <doctest.h>

#include <string>

#include "arcseal/sha256.hpp"

using namespace arcseal::ledger;

TEST_SUITE("sha256") {

// FIPS 180-4 published vectors
TEST_CASE("empty string") {
  CHECK(digest_hex(sha256(std::string{})) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("abc") {
  CHECK(digest_hex(sha256(std::string{"abc"})) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("two-block message") {
  CHECK(digest_hex(sha256(std::string{"abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"})) ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("one million a") {
  Sha256 h;
  std::string chunk(1000, 'a');
  for (int i = 0; i < 1000; ++i) h.update(chunk.data(), chunk.size());
  CHECK(digest_hex(h.finish()) == "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("single bit flip changes digest") {
  std::string a(1024, 'x');
  std::string b = a;
  b[512] = static_cast<char>(b[512] ^ 0x01);
  CHECK(sha256(a) != sha256(b));
}

TEST_CASE("streaming equals one-shot across split points") {
  std::string msg;
  for (int i = 0; i < 300; ++i) msg.push_back(static_cast<char>(i * 7 + 1));
  auto whole = sha256(msg);
  for (std::size_t split : {1u, 55u, 63u, 64u, 65u, 127u, 299u}) {
    Sha256 h;
    h.update(msg.data(), split);
    h.update(msg.data() + split, msg.size() - split);
    CHECK(h.finish() == whole);
  }
}

TEST_CASE("hmac rfc4231 case 2") {
  std::string key = "Jefe";
  std::string msg = "what do ya want for nothing?";
  auto mac = hmac_sha256(std::span(reinterpret_cast<const std::uint8_t*>(key.data()), key.size()),
                         std::span(reinterpret_cast<const std::uint8_t*>(msg.data()), msg.size()));
  CHECK(digest_hex(mac) == "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
}

}  // TEST_SUITE
