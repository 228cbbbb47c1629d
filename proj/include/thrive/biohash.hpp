#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "thrive/bigint.hpp"

namespace thrive::bio {

// Feature vector -> PCA projection -> keyed random projection -> threshold
// quantization. Two inputs hash to nearby bit strings only when both the
// biometric features and the user's secret key match.

using FeatureVector = Eigen::VectorXd;

struct PcaModel {
  Eigen::MatrixXd A;  // k x d, rows are unit eigenvectors, strongest first
  Eigen::VectorXd w;  // mean of the training samples
};

struct RpMatrix {
  Eigen::MatrixXd R;  // l x k with orthonormal rows
  std::array<uint8_t, 32> key_fingerprint;
};

struct Biohash {
  std::vector<uint8_t> bits;  // one byte per bit, values 0 or 1
  std::size_t length() const { return bits.size(); }
  bool operator==(const Biohash&) const = default;
};

using UserSecretKey = std::vector<uint8_t>;  // at least 16 bytes

// Gaussian stream derived from a secret key: 64-bit words are
// SHA-256(key || be64(counter)) truncated to the first 8 bytes, mapped into
// (0, 1] and fed through Box-Muller in sequential pairs. Same key, same
// stream, on any host.
class KeyedGaussianStream {
 public:
  explicit KeyedGaussianStream(const UserSecretKey& key);
  double next();

 private:
  uint64_t next_word();
  UserSecretKey key_;
  uint64_t counter_ = 0;
  double pending_ = 0;
  bool has_pending_ = false;
};

PcaModel pca_train(const std::vector<FeatureVector>& samples, int k);

Eigen::VectorXd pca_project(const PcaModel& model, const FeatureVector& x);

// Orthonormalizes the rows of M (modified Gram-Schmidt with a second
// projection pass). Throws if a row is linearly dependent on the ones before
// it, naming the row.
Eigen::MatrixXd gram_schmidt(const Eigen::MatrixXd& M);

RpMatrix gen_rp_matrix(const UserSecretKey& key, int l, int k);

// bit j = 1 iff z_j >= mean(z). A constant vector quantizes to all ones.
std::vector<uint8_t> quantize(const Eigen::VectorXd& z);

Biohash biohash(const PcaModel& model, const UserSecretKey& key, int l, const FeatureVector& x);

int hamming(const Biohash& a, const Biohash& b);

bool matches(const Biohash& a, const Biohash& b, int mu);

// MSB-first packing, zero padded to a byte boundary.
std::vector<uint8_t> pack_bits(const std::vector<uint8_t>& bits);
std::vector<uint8_t> unpack_bits(const std::vector<uint8_t>& bytes, std::size_t bit_count);

}  // namespace thrive::bio
