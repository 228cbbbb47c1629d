#include "thrive/signatures.hpp"

#include <stdexcept>

#include "thrive/hash.hpp"
#include "thrive/numtheory.hpp"

namespace thrive::sig {

namespace {

// 0x01 | 0xFF... | 0x00 | SHA-256(be32(|signer|) | signer | message), one
// byte narrower than the modulus so the block always compares below it. The
// signer label is hashed in so a signature never verifies under an altered
// name.
BigInt padded_digest(std::span<const uint8_t> message, const std::string& signer_id,
                     std::size_t mod_bytes) {
  if (mod_bytes < 35) throw std::invalid_argument("padded_digest: modulus too small for padding");
  std::vector<uint8_t> input;
  input.reserve(4 + signer_id.size() + message.size());
  for (int shift = 24; shift >= 0; shift -= 8)
    input.push_back(uint8_t(signer_id.size() >> shift));
  input.insert(input.end(), signer_id.begin(), signer_id.end());
  input.insert(input.end(), message.begin(), message.end());
  Digest d = sha256(input);
  std::vector<uint8_t> block(mod_bytes - 1, 0xff);
  block[0] = 0x01;
  block[block.size() - d.size() - 1] = 0x00;
  std::copy(d.begin(), d.end(), block.end() - d.size());
  return from_bytes_be(block);
}

BigInt gen_prime(unsigned bits, RandomSource& rng) {
  for (;;) {
    BigInt c = rng.exact_bits(bits);
    mpz_setbit(c.get_mpz_t(), 0);
    if (num::is_probable_prime(c)) return c;
  }
}

}  // namespace

SigKeyPair sig_keygen(unsigned modulus_bits, RandomSource& rng, bool allow_small) {
  if (modulus_bits < 1024 && !allow_small) {
    throw std::invalid_argument("sig_keygen: modulus below 1024 bits (allow_small for test keys)");
  }
  if (modulus_bits < 288) {
    throw std::invalid_argument("sig_keygen: modulus cannot fit the padded digest");
  }
  const BigInt e = 65537;
  for (;;) {
    BigInt p = gen_prime(modulus_bits / 2, rng);
    BigInt q = gen_prime(modulus_bits - modulus_bits / 2, rng);
    if (p == q) continue;
    BigInt phi = (p - 1) * (q - 1);
    BigInt g;
    mpz_gcd(g.get_mpz_t(), e.get_mpz_t(), phi.get_mpz_t());
    if (g != 1) continue;
    SigKeyPair kp;
    kp.pub.modulus = p * q;
    kp.pub.exponent = e;
    kp.priv.modulus = kp.pub.modulus;
    kp.priv.d = num::mod_inv(e, phi);
    kp.priv.p = p;
    kp.priv.q = q;
    return kp;
  }
}

Signature sign(const SigPrivateKey& key, std::span<const uint8_t> message,
               const std::string& signer_id) {
  BigInt m = padded_digest(message, signer_id, to_bytes_be(key.modulus).size());
  return Signature{num::mod_exp_signed(m, key.d, key.modulus), signer_id};
}

bool verify(const SigPublicKey& key, std::span<const uint8_t> message, const Signature& sig) {
  if (sig.value < 0 || sig.value >= key.modulus) return false;
  BigInt expected = padded_digest(message, sig.signer_id, to_bytes_be(key.modulus).size());
  BigInt recovered = num::mod_exp_signed(sig.value, key.exponent, key.modulus);
  return recovered == expected;
}

}  // namespace thrive::sig
