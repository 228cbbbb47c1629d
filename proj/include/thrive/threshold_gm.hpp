#pragma once

#include <stdexcept>

#include "thrive/bigint.hpp"
#include "thrive/random.hpp"

namespace thrive::gm {

// Two-out-of-two threshold variant of the Goldwasser-Micali bit cipher.
// The dealer splits each prime additively: p = p0 + p1 + p2 with p1, p2
// multiples of 4, publishes (N, p0, q0), and hands (p1, q1) / (p2, q2) to the
// two parties. Nobody but the dealer ever sees p or q, and the dealer drops
// them after the split.

struct GmPublicKey {
  BigInt N;
  BigInt p0;  // signed: the random shares usually exceed p and q
  BigInt q0;
  unsigned security_bits = 0;
  unsigned prime_bits = 0;
};

struct GmKeyShare {
  BigInt p_share;
  BigInt q_share;
  int index = 0;  // 1 = user, 2 = verifier
};

struct GmCiphertext {
  BigInt value;
  bool operator==(const GmCiphertext&) const = default;
};

struct DecryptionShare {
  BigInt value;
  int index = 0;  // 0 = public part, 1 and 2 = key-share holders
};

struct DealerOutput {
  GmPublicKey pk;
  GmKeyShare share1;
  GmKeyShare share2;
};

// Raised when the recombined plaintext lies outside {1, N-1}. That only
// happens if a ciphertext or a decryption share was corrupted or forged.
class CombineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Generates Blum primes of prime_bits each, splits them, and forgets them.
DealerOutput dealer_keygen(unsigned prime_bits, unsigned security_bits, RandomSource& rng,
                           bool allow_tiny = false);

// Same split applied to caller-supplied Blum primes. fixture_shares pins
// every random share to 4, which makes toy keys reproducible run to run.
DealerOutput dealer_keygen_from_primes(const BigInt& p, const BigInt& q, unsigned security_bits,
                                       RandomSource& rng, bool fixture_shares = false);

// C = (-1)^bit * r^2 mod N with r a fresh unit of Z_N.
GmCiphertext encrypt_bit(const GmPublicKey& pk, int bit, RandomSource& rng);

// Deterministic core of encrypt_bit for a caller-chosen r (tests, oracles).
GmCiphertext encrypt_bit_with_coin(const GmPublicKey& pk, int bit, const BigInt& r);

// True iff 0 < value < N and jacobi(value, N) = 1. Every well-formed
// ciphertext satisfies this, for either plaintext bit.
bool validate(const GmPublicKey& pk, const GmCiphertext& c);

// Ciphertext product; decrypts to the XOR of the two plaintext bits.
GmCiphertext hom_xor(const GmPublicKey& pk, const GmCiphertext& a, const GmCiphertext& b);

// Share-holder step: c^(-(p_share + q_share)/4) mod N.
DecryptionShare partial_decrypt(const GmKeyShare& share, const GmCiphertext& c, const BigInt& N);

// Step anyone can run from the public key: c^((N - p0 - q0 + 1)/4) mod N.
DecryptionShare public_part(const GmPublicKey& pk, const GmCiphertext& c);

// Multiplies the three parts; a product of 1 means bit 0, N-1 means bit 1,
// anything else is a CombineError.
int combine(const DecryptionShare& b0, const DecryptionShare& b1, const DecryptionShare& b2,
            const BigInt& N);

// Convenience path holding both shares; used by tests and key audits.
int decrypt_full(const GmPublicKey& pk, const GmKeyShare& share1, const GmKeyShare& share2,
                 const GmCiphertext& c);

}  // namespace thrive::gm
