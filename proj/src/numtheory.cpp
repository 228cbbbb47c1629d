#include "thrive/numtheory.hpp"

#include <stdexcept>

#include "thrive/hash.hpp"

namespace thrive::num {

namespace {

const unsigned kSmallPrimes[] = {
    3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,  47,  53,  59,  61,  67,
    71,  73,  79,  83,  89,  97,  101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157,
    163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251, 257,
    263, 269, 271, 277, 281, 283, 293, 307, 311, 313, 317, 331, 337, 347, 349, 353, 359, 367,
    373, 379, 383, 389, 397, 401, 409, 419, 421, 431, 433, 439, 443, 449, 457, 461, 463, 467,
    479, 487, 491, 499, 503, 509, 521, 523, 541, 547, 557, 563, 569, 571, 577, 587, 593, 599,
    601, 607, 613, 617, 619, 631, 641, 643, 647, 653, 659, 661, 673, 677, 683, 691, 701, 709,
    719, 727, 733, 739, 743, 751, 757, 761, 769, 773, 787, 797, 809, 811, 821, 823, 827, 829,
    839, 853, 857, 859, 863, 877, 881, 883, 887, 907, 911, 919, 929, 937, 941, 947, 953, 967,
    971, 977, 983, 991, 997};

bool miller_rabin_round(const BigInt& n, const BigInt& a, const BigInt& d, unsigned long s) {
  BigInt x;
  mpz_powm(x.get_mpz_t(), a.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
  BigInt n1 = n - 1;
  if (x == 1 || x == n1) return true;
  for (unsigned long i = 1; i < s; ++i) {
    x = (x * x) % n;
    if (x == n1) return true;
    if (x == 1) return false;
  }
  return false;
}

}  // namespace

int jacobi(const BigInt& a_in, const BigInt& n_in) {
  if (n_in < 3 || mpz_even_p(n_in.get_mpz_t())) {
    throw std::invalid_argument("jacobi: n must be odd and >= 3");
  }
  BigInt a = a_in % n_in;
  if (a < 0) a += n_in;
  BigInt n = n_in;
  int result = 1;
  while (a != 0) {
    while (mpz_even_p(a.get_mpz_t())) {
      mpz_fdiv_q_2exp(a.get_mpz_t(), a.get_mpz_t(), 1);
      unsigned long r = mpz_fdiv_ui(n.get_mpz_t(), 8);
      if (r == 3 || r == 5) result = -result;
    }
    std::swap(a, n);
    if (mpz_fdiv_ui(a.get_mpz_t(), 4) == 3 && mpz_fdiv_ui(n.get_mpz_t(), 4) == 3) result = -result;
    a %= n;
  }
  return n == 1 ? result : 0;
}

BigInt mod_exp_signed(const BigInt& base, const BigInt& exp, const BigInt& m) {
  if (m < 2) throw std::invalid_argument("mod_exp_signed: modulus must be >= 2");
  BigInt b = base % m;
  if (b < 0) b += m;
  if (exp >= 0) {
    BigInt r;
    mpz_powm(r.get_mpz_t(), b.get_mpz_t(), exp.get_mpz_t(), m.get_mpz_t());
    return r;
  }
  BigInt inv = mod_inv(b, m);
  BigInt pos = -exp;
  BigInt r;
  mpz_powm(r.get_mpz_t(), inv.get_mpz_t(), pos.get_mpz_t(), m.get_mpz_t());
  return r;
}

BigInt mod_inv(const BigInt& a, const BigInt& m) {
  if (m < 2) throw std::invalid_argument("mod_inv: modulus must be >= 2");
  BigInt r;
  if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) == 0) {
    throw std::invalid_argument("mod_inv: value not coprime to modulus");
  }
  return r;
}

bool is_probable_prime(const BigInt& n, int rounds) {
  if (rounds < 1) throw std::invalid_argument("is_probable_prime: rounds must be >= 1");
  if (n < 2) return false;
  if (n == 2) return true;
  if (mpz_even_p(n.get_mpz_t())) return false;
  for (unsigned p : kSmallPrimes) {
    if (n == p) return true;
    if (mpz_fdiv_ui(n.get_mpz_t(), p) == 0) return false;
  }
  // n - 1 = d * 2^s with d odd.
  BigInt d = n - 1;
  unsigned long s = mpz_scan1(d.get_mpz_t(), 0);
  mpz_fdiv_q_2exp(d.get_mpz_t(), d.get_mpz_t(), s);

  // Bases come from a hash stream seeded with n: same input, same verdict.
  HashDrbg base_rng(to_bytes_be(n));
  BigInt span = n - 3;  // bases drawn from [2, n-2]
  for (int i = 0; i < rounds; ++i) {
    BigInt a = 2 + base_rng.below(span);
    if (!miller_rabin_round(n, a, d, s)) return false;
  }
  return true;
}

BigInt gen_blum_prime(unsigned bits, RandomSource& rng, bool allow_tiny) {
  if (bits < 3) throw std::invalid_argument("gen_blum_prime: need at least 3 bits");
  if (bits < 16 && !allow_tiny) {
    throw std::invalid_argument("gen_blum_prime: below 16-bit floor (pass allow_tiny for toy keys)");
  }
  for (;;) {
    BigInt c = rng.exact_bits(bits);
    // Force c = 3 (mod 4); keeps the bit length since bit 1 is below the top.
    mpz_setbit(c.get_mpz_t(), 0);
    mpz_setbit(c.get_mpz_t(), 1);
    if (is_probable_prime(c)) return c;
  }
}

}  // namespace thrive::num
