#include "thrive/keyfiles.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace thrive::store {

namespace {

const char kMagic[] = {'T', 'H', 'R', 'V', 'K', 'E', 'Y'};
constexpr uint8_t kVersion = 0x01;

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_field(std::vector<uint8_t>& out, const std::vector<uint8_t>& content) {
  put_u32(out, static_cast<uint32_t>(content.size()));
  out.insert(out.end(), content.begin(), content.end());
}

void put_str(std::vector<uint8_t>& out, const std::string& s) {
  put_field(out, std::vector<uint8_t>(s.begin(), s.end()));
}

void put_u32_field(std::vector<uint8_t>& out, uint32_t v) {
  std::vector<uint8_t> c;
  put_u32(c, v);
  put_field(out, c);
}

void put_byte_field(std::vector<uint8_t>& out, uint8_t v) {
  put_field(out, {v});
}

void put_uint(std::vector<uint8_t>& out, const BigInt& v) {
  put_field(out, to_bytes_be(v));
}

void put_sint(std::vector<uint8_t>& out, const BigInt& v) {
  std::vector<uint8_t> c;
  c.push_back(v < 0 ? 1 : 0);
  std::vector<uint8_t> mag = to_bytes_be(v < 0 ? BigInt(-v) : v);
  c.insert(c.end(), mag.begin(), mag.end());
  put_field(out, c);
}

class FieldReader {
 public:
  explicit FieldReader(std::vector<uint8_t> data) : data_(std::move(data)) {}

  std::vector<uint8_t> field() {
    if (data_.size() - pos_ < 4) throw std::runtime_error("key file: truncated field length");
    uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len = (len << 8) | data_[pos_++];
    if (data_.size() - pos_ < len) throw std::runtime_error("key file: field runs past end");
    std::vector<uint8_t> out(data_.begin() + static_cast<long>(pos_),
                             data_.begin() + static_cast<long>(pos_ + len));
    pos_ += len;
    return out;
  }

  std::string str() {
    std::vector<uint8_t> f = field();
    return std::string(f.begin(), f.end());
  }

  uint32_t u32() {
    std::vector<uint8_t> f = field();
    if (f.size() != 4) throw std::runtime_error("key file: bad integer field");
    uint32_t v = 0;
    for (uint8_t b : f) v = (v << 8) | b;
    return v;
  }

  uint8_t byte() {
    std::vector<uint8_t> f = field();
    if (f.size() != 1) throw std::runtime_error("key file: bad byte field");
    return f[0];
  }

  BigInt uint() {
    return from_bytes_be(field());
  }

  BigInt sint() {
    std::vector<uint8_t> f = field();
    if (f.empty() || f[0] > 1) throw std::runtime_error("key file: bad signed integer");
    BigInt mag = from_bytes_be(std::span<const uint8_t>(f.data() + 1, f.size() - 1));
    return f[0] ? BigInt(-mag) : mag;
  }

  void finish() const {
    if (pos_ != data_.size()) throw std::runtime_error("key file: trailing bytes");
  }

 private:
  std::vector<uint8_t> data_;
  std::size_t pos_ = 0;
};

void write_file(const std::string& path, uint8_t role, const std::vector<uint8_t>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("key file: cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  out.put(static_cast<char>(kVersion));
  out.put(static_cast<char>(role));
  out.write(reinterpret_cast<const char*>(body.data()), static_cast<long>(body.size()));
  if (!out) throw std::runtime_error("key file: write failed for " + path);
}

FieldReader read_file(const std::string& path, uint8_t expected_role) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("key file: cannot open " + path);
  std::vector<uint8_t> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (raw.size() < sizeof(kMagic) + 2 || std::memcmp(raw.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("key file: bad magic in " + path);
  }
  if (raw[7] != kVersion) throw std::runtime_error("key file: unsupported version in " + path);
  if (raw[8] != expected_role) throw std::runtime_error("key file: wrong role in " + path);
  return FieldReader(std::vector<uint8_t>(raw.begin() + 9, raw.end()));
}

void read_gm_public(FieldReader& r, gm::GmPublicKey& pk) {
  pk.N = r.uint();
  pk.p0 = r.sint();
  pk.q0 = r.sint();
}

void write_gm_public(std::vector<uint8_t>& out, const gm::GmPublicKey& pk) {
  put_uint(out, pk.N);
  put_sint(out, pk.p0);
  put_sint(out, pk.q0);
}

}  // namespace

void save_user_key_file(const std::string& path, const UserKeyFile& f) {
  if (f.bio_secret.size() < 16) throw std::invalid_argument("user key file: bio secret too short");
  if (f.creds.share1.index != 1) throw std::invalid_argument("user key file: share index must be 1");
  std::vector<uint8_t> body;
  put_str(body, f.creds.user_id);
  put_u32_field(body, f.creds.pk.security_bits);
  put_u32_field(body, f.creds.pk.prime_bits);
  put_u32_field(body, f.biohash_len);
  put_byte_field(body, kHashSha256);
  write_gm_public(body, f.creds.pk);
  put_u32_field(body, 1);
  put_uint(body, f.creds.share1.p_share);
  put_uint(body, f.creds.share1.q_share);
  put_uint(body, f.creds.user_sig.pub.modulus);
  put_uint(body, f.creds.user_sig.pub.exponent);
  put_uint(body, f.creds.user_sig.priv.d);
  put_uint(body, f.creds.user_sig.priv.p);
  put_uint(body, f.creds.user_sig.priv.q);
  put_str(body, f.verifier_id);
  put_uint(body, f.creds.verifier_sig_pub.modulus);
  put_uint(body, f.creds.verifier_sig_pub.exponent);
  put_field(body, f.bio_secret);
  write_file(path, kRoleUser, body);
}

UserKeyFile load_user_key_file(const std::string& path) {
  FieldReader r = read_file(path, kRoleUser);
  UserKeyFile f;
  f.creds.user_id = r.str();
  f.creds.pk.security_bits = r.u32();
  f.creds.pk.prime_bits = r.u32();
  f.biohash_len = r.u32();
  if (r.byte() != kHashSha256) throw std::runtime_error("key file: unsupported hash algorithm");
  read_gm_public(r, f.creds.pk);
  uint32_t idx = r.u32();
  if (idx != 1) throw std::runtime_error("key file: user file must hold share index 1");
  f.creds.share1.p_share = r.uint();
  f.creds.share1.q_share = r.uint();
  f.creds.share1.index = 1;
  f.creds.user_sig.pub.modulus = r.uint();
  f.creds.user_sig.pub.exponent = r.uint();
  f.creds.user_sig.priv.modulus = f.creds.user_sig.pub.modulus;
  f.creds.user_sig.priv.d = r.uint();
  f.creds.user_sig.priv.p = r.uint();
  f.creds.user_sig.priv.q = r.uint();
  f.verifier_id = r.str();
  f.creds.verifier_sig_pub.modulus = r.uint();
  f.creds.verifier_sig_pub.exponent = r.uint();
  f.bio_secret = r.field();
  r.finish();
  if (f.bio_secret.size() < 16) throw std::runtime_error("key file: bio secret too short");
  return f;
}

void save_verifier_user_file(const std::string& path, const VerifierUserFile& f) {
  if (f.entry.share2.index != 2) {
    throw std::invalid_argument("verifier key file: share index must be 2");
  }
  std::vector<uint8_t> body;
  put_str(body, f.entry.user_id);
  put_u32_field(body, f.security_bits);
  put_u32_field(body, f.entry.pk.prime_bits);
  put_u32_field(body, f.biohash_len);
  put_byte_field(body, kHashSha256);
  write_gm_public(body, f.entry.pk);
  put_u32_field(body, 2);
  put_uint(body, f.entry.share2.p_share);
  put_uint(body, f.entry.share2.q_share);
  put_uint(body, f.entry.user_sig_pub.modulus);
  put_uint(body, f.entry.user_sig_pub.exponent);
  write_file(path, kRoleVerifierUser, body);
}

VerifierUserFile load_verifier_user_file(const std::string& path) {
  FieldReader r = read_file(path, kRoleVerifierUser);
  VerifierUserFile f;
  f.entry.user_id = r.str();
  f.security_bits = r.u32();
  f.entry.pk.security_bits = f.security_bits;
  f.entry.pk.prime_bits = r.u32();
  f.biohash_len = r.u32();
  if (r.byte() != kHashSha256) throw std::runtime_error("key file: unsupported hash algorithm");
  read_gm_public(r, f.entry.pk);
  uint32_t idx = r.u32();
  if (idx != 2) throw std::runtime_error("key file: verifier file must hold share index 2");
  f.entry.share2.p_share = r.uint();
  f.entry.share2.q_share = r.uint();
  f.entry.share2.index = 2;
  f.entry.user_sig_pub.modulus = r.uint();
  f.entry.user_sig_pub.exponent = r.uint();
  r.finish();
  return f;
}

void save_verifier_signing_file(const std::string& path, const VerifierSigningFile& f) {
  std::vector<uint8_t> body;
  put_str(body, f.identity.verifier_id);
  put_byte_field(body, kHashSha256);
  put_uint(body, f.identity.sig.pub.modulus);
  put_uint(body, f.identity.sig.pub.exponent);
  put_uint(body, f.identity.sig.priv.d);
  put_uint(body, f.identity.sig.priv.p);
  put_uint(body, f.identity.sig.priv.q);
  write_file(path, kRoleVerifierSigning, body);
}

VerifierSigningFile load_verifier_signing_file(const std::string& path) {
  FieldReader r = read_file(path, kRoleVerifierSigning);
  VerifierSigningFile f;
  f.identity.verifier_id = r.str();
  if (r.byte() != kHashSha256) throw std::runtime_error("key file: unsupported hash algorithm");
  f.identity.sig.pub.modulus = r.uint();
  f.identity.sig.pub.exponent = r.uint();
  f.identity.sig.priv.modulus = f.identity.sig.pub.modulus;
  f.identity.sig.priv.d = r.uint();
  f.identity.sig.priv.p = r.uint();
  f.identity.sig.priv.q = r.uint();
  r.finish();
  return f;
}

}  // namespace thrive::store
