#include <cstdint>
#include <set>
#include <vector>

#include "doctest.h"
#include "thrive/numtheory.hpp"
#include "thrive/random.hpp"

using namespace thrive;
using num::gen_blum_prime;
using num::is_probable_prime;
using num::jacobi;
using num::mod_exp_signed;
using num::mod_inv;

namespace {

// Everything below is computed with plain machine integers, independent of
// the library's arithmetic, so the two sides can check each other.

int64_t powmod64(int64_t b, int64_t e, int64_t m) {
  int64_t r = 1 % m;
  b %= m;
  while (e > 0) {
    if (e & 1) r = (__int128)r * b % m;
    b = (__int128)b * b % m;
    e >>= 1;
  }
  return r;
}

// Euler's criterion, valid for odd prime p.
int legendre_euler(int64_t a, int64_t p) {
  a %= p;
  if (a < 0) a += p;
  if (a == 0) return 0;
  int64_t e = powmod64(a, (p - 1) / 2, p);
  return e == 1 ? 1 : -1;
}

// Jacobi symbol from the definition: factor n, multiply Legendre symbols.
int jacobi_by_factoring(int64_t a, int64_t n) {
  int result = 1;
  for (int64_t p = 3; n > 1; p += 2) {
    while (n % p == 0) {
      n /= p;
      result *= legendre_euler(a, p);
    }
  }
  return result;
}

int64_t ext_gcd(int64_t a, int64_t b, int64_t& x, int64_t& y) {
  if (b == 0) {
    x = 1;
    y = 0;
    return a;
  }
  int64_t x1, y1;
  int64_t g = ext_gcd(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return g;
}

std::vector<bool> prime_sieve(int limit) {
  std::vector<bool> is_prime(limit + 1, true);
  is_prime[0] = is_prime[1] = false;
  for (int i = 2; i * i <= limit; ++i)
    if (is_prime[i])
      for (int j = i * i; j <= limit; j += i) is_prime[j] = false;
  return is_prime;
}

}  // namespace

TEST_CASE("jacobi agrees with the factored Legendre product on all odd moduli up to 201") {
  for (int64_t n = 3; n <= 201; n += 2) {
    for (int64_t a = 0; a <= n; ++a) {
      CAPTURE(a);
      CAPTURE(n);
      CHECK(jacobi(BigInt(long(a)), BigInt(long(n))) == jacobi_by_factoring(a, n));
    }
  }
}

TEST_CASE("jacobi handles negative and oversized arguments by reduction") {
  CHECK(jacobi(BigInt(-1), BigInt(7)) == jacobi_by_factoring(6, 7));
  CHECK(jacobi(BigInt(-10), BigInt(21)) == jacobi_by_factoring(11, 21));
  CHECK(jacobi(BigInt(77 + 3), BigInt(77)) == jacobi_by_factoring(3, 77));
}

TEST_CASE("jacobi fixed points") {
  CHECK(jacobi(BigInt(1), BigInt(77)) == 1);
  CHECK(jacobi(BigInt(7), BigInt(77)) == 0);
  CHECK(jacobi(BigInt(3), BigInt(77)) == -1);
  CHECK(jacobi(BigInt(73), BigInt(77)) == 1);
}

TEST_CASE("jacobi is multiplicative in the numerator") {
  HashDrbg rng("jacobi-mult");
  BigInt n(1295);  // 5 * 7 * 37
  for (int i = 0; i < 200; ++i) {
    BigInt a = rng.below(n);
    BigInt b = rng.below(n);
    CHECK(jacobi(a * b, n) == jacobi(a, n) * jacobi(b, n));
  }
}

TEST_CASE("jacobi rejects even or small moduli") {
  CHECK_THROWS_AS(jacobi(BigInt(3), BigInt(8)), std::invalid_argument);
  CHECK_THROWS_AS(jacobi(BigInt(3), BigInt(1)), std::invalid_argument);
  CHECK_THROWS_AS(jacobi(BigInt(3), BigInt(-7)), std::invalid_argument);
}

TEST_CASE("mod_inv agrees with extended Euclid wherever an inverse exists") {
  for (int64_t m = 2; m <= 120; ++m) {
    for (int64_t a = 1; a < m; ++a) {
      int64_t x, y;
      int64_t g = ext_gcd(a, m, x, y);
      if (g != 1) {
        CHECK_THROWS_AS(mod_inv(BigInt(long(a)), BigInt(long(m))), std::invalid_argument);
      } else {
        int64_t want = ((x % m) + m) % m;
        CHECK(mod_inv(BigInt(long(a)), BigInt(long(m))) == BigInt(long(want)));
      }
    }
  }
}

TEST_CASE("mod_inv fixed points") {
  CHECK(mod_inv(BigInt(16), BigInt(77)) == 53);
  CHECK_THROWS_AS(mod_inv(BigInt(7), BigInt(77)), std::invalid_argument);
}

TEST_CASE("mod_exp_signed matches naive repeated multiplication") {
  for (int64_t m : {2, 7, 77, 101, 437}) {
    for (int64_t b = 0; b <= 10; ++b) {
      int64_t naive = 1 % m;
      for (int64_t e = 0; e <= 40; ++e) {
        CHECK(mod_exp_signed(BigInt(long(b)), BigInt(long(e)), BigInt(long(m))) ==
              BigInt(long(naive)));
        naive = (__int128)naive * b % m;
      }
    }
  }
}

TEST_CASE("negative exponents invert: a^-e * a^e = 1 when a is a unit") {
  HashDrbg rng("neg-exp");
  BigInt m(101 * 103);
  for (int i = 0; i < 50; ++i) {
    BigInt a = 1 + rng.below(m - 1);
    if (gcd(a, m) != 1) continue;
    BigInt e = 1 + rng.below(BigInt(1000));
    BigInt fwd = mod_exp_signed(a, e, m);
    BigInt bwd = mod_exp_signed(a, -e, m);
    CHECK(fwd * bwd % m == 1);
  }
}

TEST_CASE("mod_exp_signed fixed points") {
  CHECK(mod_exp_signed(BigInt(4), BigInt(-2), BigInt(77)) == 53);
  CHECK(mod_exp_signed(BigInt(5), BigInt(0), BigInt(77)) == 1);
  CHECK(mod_exp_signed(BigInt(4), BigInt(15), BigInt(77)) == 1);
}

TEST_CASE("mod_exp_signed with a negative exponent needs a unit base") {
  CHECK_THROWS_AS(mod_exp_signed(BigInt(7), BigInt(-1), BigInt(77)), std::invalid_argument);
}

TEST_CASE("is_probable_prime agrees with a sieve up to 10000") {
  auto sieve = prime_sieve(10000);
  for (int n = 0; n <= 10000; ++n) {
    CAPTURE(n);
    CHECK(is_probable_prime(BigInt(n)) == sieve[n]);
  }
}

TEST_CASE("is_probable_prime rejects Carmichael and strong pseudoprime bait") {
  for (long n : {561L, 1105L, 1729L, 2465L, 2821L, 6601L, 8911L, 41041L}) {
    CAPTURE(n);
    CHECK_FALSE(is_probable_prime(BigInt(n)));
  }
  // Strong pseudoprime to bases 2, 3, 5, and 7 at once.
  CHECK_FALSE(is_probable_prime(BigInt("3215031751")));
}

TEST_CASE("is_probable_prime on large known values") {
  BigInt m127 = (BigInt(1) << 127) - 1;  // Mersenne prime
  CHECK(is_probable_prime(m127));
  BigInt m61 = (BigInt(1) << 61) - 1;
  BigInt m89 = (BigInt(1) << 89) - 1;
  CHECK_FALSE(is_probable_prime(m61 * m89));
  CHECK_FALSE(is_probable_prime(BigInt(0)));
  CHECK_FALSE(is_probable_prime(BigInt(1)));
  CHECK_FALSE(is_probable_prime(BigInt(-7)));
}

TEST_CASE("3 and 4 bit Blum primes are unique, so generation is exhaustive") {
  // Only 7 among the 3-bit integers is a prime congruent 3 mod 4; only 11
  // among the 4-bit ones. Any correct generator must return exactly these.
  for (const char* seed : {"a", "b", "c"}) {
    HashDrbg rng(std::string("blum-") + seed);
    CHECK(gen_blum_prime(3, rng, true) == 7);
    CHECK(gen_blum_prime(4, rng, true) == 11);
  }
}

TEST_CASE("5-bit Blum primes all appear and nothing else does") {
  std::set<long> seen;
  for (int i = 0; i < 40; ++i) {
    HashDrbg rng("blum5-" + std::to_string(i));
    BigInt p = gen_blum_prime(5, rng, true);
    seen.insert(p.get_si());
  }
  CHECK(seen == std::set<long>{19, 23, 31});
}

TEST_CASE("generated Blum primes have the exact bit length and residue") {
  SystemRandom rng;
  for (unsigned bits : {16u, 24u, 48u}) {
    BigInt p = gen_blum_prime(bits, rng);
    CHECK(bit_length(p) == bits);
    CHECK(p % 4 == 3);
    CHECK(is_probable_prime(p));
  }
}

TEST_CASE("tiny Blum primes need the explicit opt-in") {
  SystemRandom rng;
  CHECK_THROWS_AS(gen_blum_prime(8, rng), std::invalid_argument);
  CHECK_THROWS_AS(gen_blum_prime(2, rng, true), std::invalid_argument);
}
