#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "thrive/bigint.hpp"

namespace thrive {

class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<uint8_t> out) = 0;

  std::vector<uint8_t> bytes(std::size_t n);
  uint64_t next_u64();

  // Uniform value in [0, bound) by rejection sampling. bound must be > 0.
  BigInt below(const BigInt& bound);

  // Uniform value with exactly `bits` significant bits (top bit forced).
  BigInt exact_bits(std::size_t bits);
};

// OS entropy via getrandom(2).
class SystemRandom : public RandomSource {
 public:
  void fill(std::span<uint8_t> out) override;
};

// Deterministic stream: block(i) = SHA-256(seed || be64(i)). Used by tests
// that need reproducible keys and by internal derivations keyed on a value.
class HashDrbg : public RandomSource {
 public:
  explicit HashDrbg(std::span<const uint8_t> seed);
  explicit HashDrbg(const std::string& seed);
  void fill(std::span<uint8_t> out) override;

 private:
  std::vector<uint8_t> seed_;
  uint64_t counter_ = 0;
  std::vector<uint8_t> buffer_;
  std::size_t pos_ = 0;
};

}  // namespace thrive
