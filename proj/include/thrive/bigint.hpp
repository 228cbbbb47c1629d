#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace thrive {

// Arbitrary-precision signed integer. All protocol math runs on this type;
// byte conversions below define the big-endian form used on the wire and in
// key files.
using BigInt = mpz_class;

std::size_t bit_length(const BigInt& v);

// Minimal big-endian magnitude, no leading zero bytes. Zero encodes as the
// empty string. Negative input is rejected; signed values are serialized by
// the callers that need them (sign byte + magnitude).
std::vector<uint8_t> to_bytes_be(const BigInt& v);

// Big-endian magnitude left-padded to exactly `width` bytes. Throws if the
// value does not fit.
std::vector<uint8_t> to_bytes_be_fixed(const BigInt& v, std::size_t width);

BigInt from_bytes_be(std::span<const uint8_t> bytes);

std::string to_hex(const BigInt& v);

}  // namespace thrive
