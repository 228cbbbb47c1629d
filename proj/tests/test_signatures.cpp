#include <vector>

#include "doctest.h"
#include "thrive/hash.hpp"
#include "thrive/random.hpp"
#include "thrive/signatures.hpp"

using namespace thrive;

namespace {

std::vector<uint8_t> msg_bytes(const std::string& s) {
  return std::vector<uint8_t>(s.begin(), s.end());
}

sig::SigKeyPair test_key(const std::string& seed, unsigned bits = 512) {
  HashDrbg rng(seed);
  return sig::sig_keygen(bits, rng, true);
}

}  // namespace

TEST_CASE("sign and verify round trip") {
  auto kp = test_key("sig-roundtrip");
  auto m = msg_bytes("attack at dawn");
  auto s = sig::sign(kp.priv, m, "alice");
  CHECK(s.signer_id == "alice");
  CHECK(sig::verify(kp.pub, m, s));
}

TEST_CASE("signing is deterministic") {
  auto kp = test_key("sig-det");
  auto m = msg_bytes("same message");
  auto s1 = sig::sign(kp.priv, m, "a");
  auto s2 = sig::sign(kp.priv, m, "a");
  CHECK(s1.value == s2.value);
}

TEST_CASE("the signer label is bound into the signature") {
  auto kp = test_key("sig-label");
  auto m = msg_bytes("labelled content");
  auto s = sig::sign(kp.priv, m, "verifier-1");
  CHECK(sig::verify(kp.pub, m, s));
  sig::Signature renamed = s;
  renamed.signer_id = "verifier-2";
  CHECK_FALSE(sig::verify(kp.pub, m, renamed));
  renamed.signer_id = "";
  CHECK_FALSE(sig::verify(kp.pub, m, renamed));
  // different labels also give different signature values over equal bytes
  CHECK(sig::sign(kp.priv, m, "x").value != s.value);
}

TEST_CASE("any flipped message bit breaks verification") {
  auto kp = test_key("sig-flip");
  auto m = msg_bytes("0123456789abcdef");
  auto s = sig::sign(kp.priv, m, "a");
  for (std::size_t byte = 0; byte < m.size(); ++byte) {
    for (int bit = 0; bit < 8; bit += 3) {
      auto tampered = m;
      tampered[byte] ^= uint8_t(1u << bit);
      CAPTURE(byte);
      CHECK_FALSE(sig::verify(kp.pub, tampered, s));
    }
  }
}

TEST_CASE("a tampered signature value fails") {
  auto kp = test_key("sig-tamper");
  auto m = msg_bytes("message");
  auto s = sig::sign(kp.priv, m, "a");
  auto bad = s;
  bad.value += 1;
  CHECK_FALSE(sig::verify(kp.pub, m, bad));
  bad.value = s.value ^ (BigInt(1) << 17);
  CHECK_FALSE(sig::verify(kp.pub, m, bad));
}

TEST_CASE("out-of-range signature values are rejected, not reduced") {
  auto kp = test_key("sig-range");
  auto m = msg_bytes("message");
  auto s = sig::sign(kp.priv, m, "a");
  auto bad = s;
  bad.value = s.value + kp.pub.modulus;  // same residue, wrong encoding
  CHECK_FALSE(sig::verify(kp.pub, m, bad));
  bad.value = 0;
  CHECK_FALSE(sig::verify(kp.pub, m, bad));
  bad.value = -s.value;
  CHECK_FALSE(sig::verify(kp.pub, m, bad));
}

TEST_CASE("a signature does not transfer to another key") {
  auto kp1 = test_key("sig-key1");
  auto kp2 = test_key("sig-key2");
  auto m = msg_bytes("message");
  auto s = sig::sign(kp1.priv, m, "a");
  CHECK_FALSE(sig::verify(kp2.pub, m, s));
}

TEST_CASE("truncated and extended messages fail") {
  auto kp = test_key("sig-trunc");
  auto m = msg_bytes("full length message");
  auto s = sig::sign(kp.priv, m, "a");
  auto shorter = m;
  shorter.pop_back();
  CHECK_FALSE(sig::verify(kp.pub, shorter, s));
  auto longer = m;
  longer.push_back(0);
  CHECK_FALSE(sig::verify(kp.pub, longer, s));
  CHECK(sig::verify(kp.pub, m, s));
}

TEST_CASE("empty messages sign fine") {
  auto kp = test_key("sig-empty");
  std::vector<uint8_t> empty;
  auto s = sig::sign(kp.priv, empty, "a");
  CHECK(sig::verify(kp.pub, empty, s));
  CHECK_FALSE(sig::verify(kp.pub, msg_bytes("x"), s));
}

TEST_CASE("keygen basics hold") {
  auto kp = test_key("sig-basics", 512);
  CHECK(kp.pub.exponent == 65537);
  CHECK(bit_length(kp.pub.modulus) == 512);
  CHECK(kp.pub.modulus == kp.priv.p * kp.priv.q);
  // d inverts e modulo lcm(p-1, q-1), so e*d = 1 there
  BigInt lam = lcm(kp.priv.p - 1, kp.priv.q - 1);
  CHECK(kp.priv.d * 65537 % lam == 1);
}

TEST_CASE("minimum modulus leaves room for the padded digest") {
  HashDrbg rng("sig-min");
  CHECK_THROWS_AS(sig::sig_keygen(280, rng, true), std::invalid_argument);
  auto kp = sig::sig_keygen(288, rng, true);
  auto m = msg_bytes("tight fit");
  CHECK(sig::verify(kp.pub, m, sig::sign(kp.priv, m, "a")));
}

TEST_CASE("short keys require the explicit opt-in") {
  HashDrbg rng("sig-short");
  CHECK_THROWS_AS(sig::sig_keygen(512, rng), std::invalid_argument);
}

TEST_CASE("default-size keys work end to end") {
  HashDrbg rng("sig-1024");
  auto kp = sig::sig_keygen(1024, rng);
  // Two exact 512-bit primes multiply to 1023 or 1024 bits.
  CHECK(bit_length(kp.pub.modulus) >= 1023);
  CHECK(bit_length(kp.pub.modulus) <= 1024);
  auto m = msg_bytes("production sized");
  CHECK(sig::verify(kp.pub, m, sig::sign(kp.priv, m, "a")));
}
