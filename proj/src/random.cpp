#include "thrive/random.hpp"

#include <sys/random.h>

#include <cstring>
#include <stdexcept>

#include "thrive/hash.hpp"

namespace thrive {

std::vector<uint8_t> RandomSource::bytes(std::size_t n) {
  std::vector<uint8_t> out(n);
  fill(out);
  return out;
}

uint64_t RandomSource::next_u64() {
  uint8_t buf[8];
  fill(buf);
  uint64_t v = 0;
  for (uint8_t b : buf) v = (v << 8) | b;
  return v;
}

BigInt RandomSource::below(const BigInt& bound) {
  if (bound <= 0) throw std::invalid_argument("RandomSource::below: bound must be positive");
  std::size_t bits = bit_length(bound);
  std::size_t nbytes = (bits + 7) / 8;
  unsigned top_mask = (bits % 8 == 0) ? 0xff : ((1u << (bits % 8)) - 1);
  std::vector<uint8_t> buf(nbytes);
  // Rejection sampling keeps the draw uniform; expected < 2 iterations.
  for (;;) {
    fill(buf);
    buf[0] &= static_cast<uint8_t>(top_mask);
    BigInt v = from_bytes_be(buf);
    if (v < bound) return v;
  }
}

BigInt RandomSource::exact_bits(std::size_t bits) {
  if (bits == 0) throw std::invalid_argument("RandomSource::exact_bits: bits must be positive");
  std::size_t nbytes = (bits + 7) / 8;
  std::vector<uint8_t> buf(nbytes);
  fill(buf);
  BigInt v = from_bytes_be(buf);
  std::size_t excess = nbytes * 8 - bits;
  if (excess) mpz_fdiv_q_2exp(v.get_mpz_t(), v.get_mpz_t(), excess);
  mpz_setbit(v.get_mpz_t(), bits - 1);
  return v;
}

void SystemRandom::fill(std::span<uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    ssize_t got = getrandom(out.data() + done, out.size() - done, 0);
    if (got < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error("getrandom failed");
    }
    done += static_cast<std::size_t>(got);
  }
}

HashDrbg::HashDrbg(std::span<const uint8_t> seed) : seed_(seed.begin(), seed.end()) {}

HashDrbg::HashDrbg(const std::string& seed)
    : seed_(reinterpret_cast<const uint8_t*>(seed.data()),
            reinterpret_cast<const uint8_t*>(seed.data()) + seed.size()) {}

void HashDrbg::fill(std::span<uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    if (pos_ == buffer_.size()) {
      std::vector<uint8_t> block(seed_);
      for (int i = 7; i >= 0; --i) block.push_back(static_cast<uint8_t>(counter_ >> (8 * i)));
      Digest d = sha256(block);
      buffer_.assign(d.begin(), d.end());
      pos_ = 0;
      ++counter_;
    }
    std::size_t take = std::min(out.size() - done, buffer_.size() - pos_);
    std::memcpy(out.data() + done, buffer_.data() + pos_, take);
    done += take;
    pos_ += take;
  }
}

}  // namespace thrive
