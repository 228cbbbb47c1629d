#pragma once

#include <span>
#include <string>

#include "thrive/bigint.hpp"
#include "thrive/random.hpp"

namespace thrive::sig {

// Hash-then-sign RSA. The signer label and the message are digested together
// with SHA-256 (length-prefixed label first), padded to one byte short of the
// modulus width (0x01, 0xFF fill, 0x00, digest), and the padded block is
// exponentiated. Padding is deterministic, so sign() is a pure function of
// (key, label, message), and a signature never verifies under a different
// label than it was made with.

struct SigPublicKey {
  BigInt modulus;
  BigInt exponent;  // always 65537
};

struct SigPrivateKey {
  BigInt modulus;
  BigInt d;
  BigInt p;  // prime factors stay with the signer for key audits
  BigInt q;
};

struct SigKeyPair {
  SigPublicKey pub;
  SigPrivateKey priv;
};

struct Signature {
  BigInt value;
  std::string signer_id;
};

// modulus_bits >= 1024 unless allow_small is set (tests use shorter keys).
SigKeyPair sig_keygen(unsigned modulus_bits, RandomSource& rng, bool allow_small = false);

Signature sign(const SigPrivateKey& key, std::span<const uint8_t> message,
               const std::string& signer_id);

bool verify(const SigPublicKey& key, std::span<const uint8_t> message, const Signature& sig);

}  // namespace thrive::sig
