#include "thrive/biohash.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "thrive/hash.hpp"

namespace thrive::bio {

KeyedGaussianStream::KeyedGaussianStream(const UserSecretKey& key) : key_(key) {
  if (key.size() < 16) throw std::invalid_argument("KeyedGaussianStream: key shorter than 16 bytes");
}

uint64_t KeyedGaussianStream::next_word() {
  std::vector<uint8_t> block(key_);
  for (int i = 7; i >= 0; --i) block.push_back(static_cast<uint8_t>(counter_ >> (8 * i)));
  ++counter_;
  Digest d = sha256(block);
  uint64_t w = 0;
  for (int i = 0; i < 8; ++i) w = (w << 8) | d[i];
  return w;
}

double KeyedGaussianStream::next() {
  if (has_pending_) {
    has_pending_ = false;
    return pending_;
  }
  // Map words into (0, 1]; u1 > 0 keeps the log finite.
  double u1 = (static_cast<double>(next_word()) + 1.0) * 0x1p-64;
  double u2 = (static_cast<double>(next_word()) + 1.0) * 0x1p-64;
  double mag = std::sqrt(-2.0 * std::log(u1));
  double ang = 2.0 * std::numbers::pi * u2;
  pending_ = mag * std::sin(ang);
  has_pending_ = true;
  return mag * std::cos(ang);
}

PcaModel pca_train(const std::vector<FeatureVector>& samples, int k) {
  if (samples.size() < 2) throw std::invalid_argument("pca_train: need at least two samples");
  Eigen::Index d = samples[0].size();
  for (const auto& s : samples) {
    if (s.size() != d) throw std::invalid_argument("pca_train: inconsistent sample dimensions");
  }
  Eigen::Index n = static_cast<Eigen::Index>(samples.size());
  if (k < 1 || k > std::min<Eigen::Index>(n - 1, d)) {
    throw std::invalid_argument("pca_train: k must be in [1, min(samples-1, dim)]");
  }

  Eigen::MatrixXd X(n, d);
  for (Eigen::Index i = 0; i < n; ++i) X.row(i) = samples[static_cast<std::size_t>(i)];
  Eigen::VectorXd w = X.colwise().mean();
  Eigen::MatrixXd centered = X.rowwise() - w.transpose();
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw std::runtime_error("pca_train: eigensolver failed");
  if (solver.eigenvalues()(d - 1) < 1e-12) {
    throw std::invalid_argument("pca_train: degenerate samples (no variance)");
  }

  // Eigen sorts ascending; take the top k in descending order.
  PcaModel model;
  model.A.resize(k, d);
  for (int i = 0; i < k; ++i) model.A.row(i) = solver.eigenvectors().col(d - 1 - i).transpose();
  model.w = w;
  return model;
}

Eigen::VectorXd pca_project(const PcaModel& model, const FeatureVector& x) {
  if (x.size() != model.w.size() || model.A.cols() != x.size()) {
    throw std::invalid_argument("pca_project: dimension mismatch");
  }
  return model.A * (x - model.w);
}

Eigen::MatrixXd gram_schmidt(const Eigen::MatrixXd& M) {
  if (M.rows() < 1 || M.rows() > M.cols()) {
    throw std::invalid_argument("gram_schmidt: need 1 <= rows <= cols");
  }
  Eigen::MatrixXd Q = M;
  for (Eigen::Index i = 0; i < Q.rows(); ++i) {
    // Two sweeps: the second mops up the rounding left by the first.
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < i; ++j) {
        Q.row(i) -= Q.row(i).dot(Q.row(j)) * Q.row(j);
      }
    }
    double norm = Q.row(i).norm();
    if (norm < 1e-12) {
      throw std::invalid_argument("gram_schmidt: row " + std::to_string(i) +
                                  " is linearly dependent");
    }
    Q.row(i) /= norm;
  }
  return Q;
}

RpMatrix gen_rp_matrix(const UserSecretKey& key, int l, int k) {
  if (l < 1 || k < 1 || l > k) throw std::invalid_argument("gen_rp_matrix: need 1 <= l <= k");
  KeyedGaussianStream stream(key);
  Eigen::MatrixXd raw(l, k);
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < k; ++j) raw(i, j) = stream.next();
  }
  RpMatrix rp;
  rp.R = gram_schmidt(raw);
  rp.key_fingerprint = sha256(std::span<const uint8_t>(key.data(), key.size()));
  return rp;
}

std::vector<uint8_t> quantize(const Eigen::VectorXd& z) {
  if (z.size() < 1) throw std::invalid_argument("quantize: empty input");
  double beta = z.mean();
  std::vector<uint8_t> bits(static_cast<std::size_t>(z.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) bits[static_cast<std::size_t>(i)] = z(i) >= beta ? 1 : 0;
  return bits;
}

Biohash biohash(const PcaModel& model, const UserSecretKey& key, int l, const FeatureVector& x) {
  Eigen::VectorXd y = pca_project(model, x);
  RpMatrix rp = gen_rp_matrix(key, l, static_cast<int>(y.size()));
  Eigen::VectorXd z = rp.R * y;
  return Biohash{quantize(z)};
}

int hamming(const Biohash& a, const Biohash& b) {
  if (a.length() != b.length()) throw std::invalid_argument("hamming: length mismatch");
  int d = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) d += a.bits[i] != b.bits[i];
  return d;
}

bool matches(const Biohash& a, const Biohash& b, int mu) {
  if (mu < 0) throw std::invalid_argument("matches: mu must be non-negative");
  return hamming(a, b) <= mu;
}

std::vector<uint8_t> pack_bits(const std::vector<uint8_t>& bits) {
  std::vector<uint8_t> out((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] > 1) throw std::invalid_argument("pack_bits: values must be 0 or 1");
    if (bits[i]) out[i / 8] |= static_cast<uint8_t>(0x80u >> (i % 8));
  }
  return out;
}

std::vector<uint8_t> unpack_bits(const std::vector<uint8_t>& bytes, std::size_t bit_count) {
  if (bytes.size() != (bit_count + 7) / 8) throw std::invalid_argument("unpack_bits: size mismatch");
  std::vector<uint8_t> bits(bit_count);
  for (std::size_t i = 0; i < bit_count; ++i) {
    bits[i] = (bytes[i / 8] >> (7 - i % 8)) & 1;
  }
  // Padding bits past bit_count must be zero for the encoding to be canonical.
  if (bit_count % 8 != 0 && !bytes.empty()) {
    uint8_t tail = bytes.back() & static_cast<uint8_t>(0xff >> (bit_count % 8));
    if (tail != 0) throw std::invalid_argument("unpack_bits: nonzero padding bits");
  }
  return bits;
}

}  // namespace thrive::bio
