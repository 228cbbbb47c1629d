#include "thrive/bigint.hpp"

#include <stdexcept>

namespace thrive {

std::size_t bit_length(const BigInt& v) {
  if (v == 0) return 0;
  return mpz_sizeinbase(v.get_mpz_t(), 2);
}

std::vector<uint8_t> to_bytes_be(const BigInt& v) {
  if (v < 0) throw std::invalid_argument("to_bytes_be: negative value");
  if (v == 0) return {};
  std::size_t count = 0;
  std::vector<uint8_t> out((bit_length(v) + 7) / 8);
  mpz_export(out.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
  out.resize(count);
  return out;
}

std::vector<uint8_t> to_bytes_be_fixed(const BigInt& v, std::size_t width) {
  std::vector<uint8_t> raw = to_bytes_be(v);
  if (raw.size() > width) throw std::invalid_argument("to_bytes_be_fixed: value too wide");
  std::vector<uint8_t> out(width, 0);
  std::copy(raw.begin(), raw.end(), out.begin() + (width - raw.size()));
  return out;
}

BigInt from_bytes_be(std::span<const uint8_t> bytes) {
  BigInt v = 0;
  if (!bytes.empty()) mpz_import(v.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  return v;
}

std::string to_hex(const BigInt& v) {
  return v.get_str(16);
}

}  // namespace thrive
