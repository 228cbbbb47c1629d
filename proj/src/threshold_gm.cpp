#include "thrive/threshold_gm.hpp"

#include <algorithm>

#include "thrive/numtheory.hpp"

namespace thrive::gm {

namespace {

// Uniform multiple of 4 in (0, 2^(2*prime_bits)).
BigInt draw_share(unsigned prime_bits, RandomSource& rng) {
  BigInt bound = BigInt(1) << (2 * prime_bits);
  for (;;) {
    BigInt v = rng.below(bound);
    v -= v % 4;
    if (v != 0) return v;
  }
}

DealerOutput split_primes(const BigInt& p, const BigInt& q, unsigned prime_bits,
                          unsigned security_bits, RandomSource& rng, bool fixture_shares) {
  BigInt p1, q1, p2, q2;
  if (fixture_shares) {
    p1 = q1 = p2 = q2 = 4;
  } else {
    p1 = draw_share(prime_bits, rng);
    q1 = draw_share(prime_bits, rng);
    p2 = draw_share(prime_bits, rng);
    q2 = draw_share(prime_bits, rng);
  }
  DealerOutput out;
  out.pk.N = p * q;
  out.pk.p0 = p - p1 - p2;
  out.pk.q0 = q - q1 - q2;
  out.pk.security_bits = security_bits;
  out.pk.prime_bits = prime_bits;
  out.share1 = GmKeyShare{p1, q1, 1};
  out.share2 = GmKeyShare{p2, q2, 2};
  return out;
}

}  // namespace

DealerOutput dealer_keygen(unsigned prime_bits, unsigned security_bits, RandomSource& rng,
                           bool allow_tiny) {
  BigInt p = num::gen_blum_prime(prime_bits, rng, allow_tiny);
  BigInt q;
  do {
    q = num::gen_blum_prime(prime_bits, rng, allow_tiny);
  } while (q == p);
  return split_primes(p, q, prime_bits, security_bits, rng, false);
  // p and q go out of scope here; only the additive shares survive.
}

DealerOutput dealer_keygen_from_primes(const BigInt& p, const BigInt& q, unsigned security_bits,
                                       RandomSource& rng, bool fixture_shares) {
  if (p == q) throw std::invalid_argument("dealer_keygen_from_primes: primes must differ");
  if (!num::is_probable_prime(p) || !num::is_probable_prime(q)) {
    throw std::invalid_argument("dealer_keygen_from_primes: inputs must be prime");
  }
  if (mpz_fdiv_ui(p.get_mpz_t(), 4) != 3 || mpz_fdiv_ui(q.get_mpz_t(), 4) != 3) {
    throw std::invalid_argument("dealer_keygen_from_primes: primes must be 3 (mod 4)");
  }
  unsigned prime_bits = static_cast<unsigned>(std::max(bit_length(p), bit_length(q)));
  return split_primes(p, q, prime_bits, security_bits, rng, fixture_shares);
}

GmCiphertext encrypt_bit(const GmPublicKey& pk, int bit, RandomSource& rng) {
  for (;;) {
    BigInt r = rng.below(pk.N);
    if (r == 0) continue;
    BigInt g;
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), pk.N.get_mpz_t());
    if (g != 1) continue;
    return encrypt_bit_with_coin(pk, bit, r);
  }
}

GmCiphertext encrypt_bit_with_coin(const GmPublicKey& pk, int bit, const BigInt& r) {
  if (bit != 0 && bit != 1) throw std::invalid_argument("encrypt_bit: bit must be 0 or 1");
  if (r <= 0 || r >= pk.N) throw std::invalid_argument("encrypt_bit: r out of range");
  BigInt g;
  mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), pk.N.get_mpz_t());
  if (g != 1) throw std::invalid_argument("encrypt_bit: r not a unit");
  BigInt c = (r * r) % pk.N;
  if (bit == 1) c = pk.N - c;
  return GmCiphertext{c};
}

bool validate(const GmPublicKey& pk, const GmCiphertext& c) {
  if (c.value <= 0 || c.value >= pk.N) return false;
  return num::jacobi(c.value, pk.N) == 1;
}

GmCiphertext hom_xor(const GmPublicKey& pk, const GmCiphertext& a, const GmCiphertext& b) {
  if (!validate(pk, a) || !validate(pk, b)) {
    throw std::invalid_argument("hom_xor: operand is not a valid ciphertext");
  }
  return GmCiphertext{(a.value * b.value) % pk.N};
}

DecryptionShare partial_decrypt(const GmKeyShare& share, const GmCiphertext& c, const BigInt& N) {
  if (c.value <= 0 || c.value >= N) throw std::invalid_argument("partial_decrypt: ciphertext out of range");
  BigInt sum = share.p_share + share.q_share;
  if (sum % 4 != 0) throw std::invalid_argument("partial_decrypt: share sum not divisible by 4");
  BigInt exp = -(sum / 4);
  return DecryptionShare{num::mod_exp_signed(c.value, exp, N), share.index};
}

DecryptionShare public_part(const GmPublicKey& pk, const GmCiphertext& c) {
  if (c.value <= 0 || c.value >= pk.N) throw std::invalid_argument("public_part: ciphertext out of range");
  BigInt num = pk.N - pk.p0 - pk.q0 + 1;
  if (num % 4 != 0) throw std::invalid_argument("public_part: key is inconsistent");
  return DecryptionShare{num::mod_exp_signed(c.value, num / 4, pk.N), 0};
}

int combine(const DecryptionShare& b0, const DecryptionShare& b1, const DecryptionShare& b2,
            const BigInt& N) {
  int lo = std::min({b0.index, b1.index, b2.index});
  int hi = std::max({b0.index, b1.index, b2.index});
  if (lo != 0 || hi != 2 || b0.index + b1.index + b2.index != 3) {
    throw std::invalid_argument("combine: share indices must be 0, 1, 2");
  }
  BigInt prod = (((b0.value * b1.value) % N) * b2.value) % N;
  if (prod == 1) return 0;
  if (prod == N - 1) return 1;
  throw CombineError("combine: product is neither 1 nor N-1 (corrupted ciphertext or share)");
}

int decrypt_full(const GmPublicKey& pk, const GmKeyShare& share1, const GmKeyShare& share2,
                 const GmCiphertext& c) {
  if (!validate(pk, c)) throw std::invalid_argument("decrypt_full: invalid ciphertext");
  DecryptionShare b0 = public_part(pk, c);
  DecryptionShare b1 = partial_decrypt(share1, c, pk.N);
  DecryptionShare b2 = partial_decrypt(share2, c, pk.N);
  return combine(b0, b1, b2, pk.N);
}

}  // namespace thrive::gm
