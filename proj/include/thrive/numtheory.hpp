#pragma once

#include "thrive/bigint.hpp"
#include "thrive/random.hpp"

namespace thrive::num {

// Jacobi symbol (a/n) for odd n >= 3, computed by the standard reciprocity
// law. Returns -1, 0, or 1; 0 exactly when gcd(a, n) > 1.
int jacobi(const BigInt& a, const BigInt& n);

// base^exp mod m for signed exp. A negative exponent is resolved by one
// modular inversion of the base followed by a positive exponentiation, so it
// requires gcd(base, m) = 1. m must be >= 2. exp = 0 yields 1.
BigInt mod_exp_signed(const BigInt& base, const BigInt& exp, const BigInt& m);

// Inverse of a modulo m (m >= 2); throws if gcd(a, m) != 1.
BigInt mod_inv(const BigInt& a, const BigInt& m);

// Miller-Rabin test with `rounds` random bases (error probability below
// 4^-rounds). Bases are derived deterministically from n so results are
// reproducible.
bool is_probable_prime(const BigInt& n, int rounds = 40);

// Random prime p with exactly `bits` bits and p = 3 (mod 4). The floor of 16
// bits guards against accidentally weak keys; allow_tiny lifts it for the
// hand-checkable moduli used in tests and toy mode.
BigInt gen_blum_prime(unsigned bits, RandomSource& rng, bool allow_tiny = false);

}  // namespace thrive::num
