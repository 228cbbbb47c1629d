#include "thrive/wire.hpp"

#include "thrive/biohash.hpp"

namespace thrive::wire {

namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 7; i >= 0; --i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_field(std::vector<uint8_t>& out, std::span<const uint8_t> content) {
  if (content.size() > kMaxPayload) throw WireError("field too large");
  put_u32(out, static_cast<uint32_t>(content.size()));
  out.insert(out.end(), content.begin(), content.end());
}

std::vector<uint8_t> str_content(const std::string& s) {
  return std::vector<uint8_t>(s.begin(), s.end());
}

std::vector<uint8_t> u32_content(uint32_t v) {
  std::vector<uint8_t> out;
  put_u32(out, v);
  return out;
}

std::vector<uint8_t> uint_content(const BigInt& v) {
  return to_bytes_be(v);
}

std::vector<uint8_t> bitvec_content(const std::vector<uint8_t>& bits) {
  std::vector<uint8_t> out;
  put_u32(out, static_cast<uint32_t>(bits.size()));
  std::vector<uint8_t> packed = bio::pack_bits(bits);
  out.insert(out.end(), packed.begin(), packed.end());
  return out;
}

std::vector<uint8_t> ctvec_content(const CtVector& v) {
  std::vector<uint8_t> out;
  put_u32(out, static_cast<uint32_t>(v.values.size()));
  put_u32(out, v.width);
  for (const BigInt& c : v.values) {
    std::vector<uint8_t> fixed = to_bytes_be_fixed(c, v.width);
    out.insert(out.end(), fixed.begin(), fixed.end());
  }
  return out;
}

std::vector<uint8_t> nonce_content(const Nonce& n) {
  std::vector<uint8_t> out;
  put_u32(out, static_cast<uint32_t>(n.actor_id.size()));
  out.insert(out.end(), n.actor_id.begin(), n.actor_id.end());
  out.insert(out.end(), n.session_id.begin(), n.session_id.end());
  put_u64(out, n.timestamp);
  return out;
}

// --- reading -------------------------------------------------------------

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> data) : data_(data) {}

  std::span<const uint8_t> field() {
    uint32_t len = raw_u32();
    if (data_.size() - pos_ < len) throw WireError("field runs past payload end");
    std::span<const uint8_t> out = data_.subspan(pos_, len);
    pos_ += len;
    return out;
  }

  void finish() const {
    if (pos_ != data_.size()) throw WireError("trailing bytes after last field");
  }

 private:
  uint32_t raw_u32() {
    if (data_.size() - pos_ < 4) throw WireError("truncated field length");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 4;
    return v;
  }

  std::span<const uint8_t> data_;
  std::size_t pos_ = 0;
};

uint32_t read_u32(std::span<const uint8_t> c, std::size_t at = 0) {
  if (c.size() < at + 4) throw WireError("truncated integer");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | c[at + static_cast<std::size_t>(i)];
  return v;
}

uint64_t read_u64(std::span<const uint8_t> c, std::size_t at = 0) {
  if (c.size() < at + 8) throw WireError("truncated integer");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | c[at + static_cast<std::size_t>(i)];
  return v;
}

std::string parse_str(std::span<const uint8_t> c) {
  return std::string(c.begin(), c.end());
}

uint32_t parse_u32(std::span<const uint8_t> c) {
  if (c.size() != 4) throw WireError("integer field has wrong size");
  return read_u32(c);
}

BigInt parse_uint(std::span<const uint8_t> c) {
  if (!c.empty() && c[0] == 0) throw WireError("integer has leading zero byte");
  return from_bytes_be(c);
}

std::vector<uint8_t> parse_bitvec(std::span<const uint8_t> c) {
  uint32_t bit_count = read_u32(c);
  std::size_t expect = (static_cast<std::size_t>(bit_count) + 7) / 8;
  if (c.size() != 4 + expect) throw WireError("bit vector length mismatch");
  std::vector<uint8_t> packed(c.begin() + 4, c.end());
  try {
    return bio::unpack_bits(packed, bit_count);
  } catch (const std::invalid_argument& e) {
    throw WireError(e.what());
  }
}

CtVector parse_ctvec(std::span<const uint8_t> c) {
  uint32_t count = read_u32(c, 0);
  uint32_t width = read_u32(c, 4);
  if (width == 0 || width > (1u << 20)) throw WireError("ciphertext width out of range");
  if (count > (1u << 20)) throw WireError("ciphertext count out of range");
  if (c.size() != 8 + static_cast<std::size_t>(count) * width) {
    throw WireError("ciphertext vector length mismatch");
  }
  CtVector out;
  out.width = width;
  out.values.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    out.values.push_back(from_bytes_be(c.subspan(8 + static_cast<std::size_t>(i) * width, width)));
  }
  return out;
}

Nonce parse_nonce(std::span<const uint8_t> c) {
  uint32_t actor_len = read_u32(c);
  if (c.size() != 4 + static_cast<std::size_t>(actor_len) + 16 + 8) {
    throw WireError("nonce length mismatch");
  }
  Nonce n;
  n.actor_id = std::string(c.begin() + 4, c.begin() + 4 + actor_len);
  std::copy(c.begin() + 4 + actor_len, c.begin() + 4 + actor_len + 16, n.session_id.begin());
  n.timestamp = read_u64(c, 4 + actor_len + 16);
  return n;
}

std::vector<uint8_t> finish_frame(Type type, const std::vector<uint8_t>& payload) {
  if (payload.size() > kMaxPayload) throw WireError("payload exceeds size cap");
  std::vector<uint8_t> out;
  out.reserve(kHeaderSize + payload.size());
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  out.push_back(kVersion);
  out.push_back(static_cast<uint8_t>(type));
  put_u32(out, static_cast<uint32_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

struct Encoder {
  std::vector<uint8_t> operator()(const EnrollMsg& m) const {
    std::vector<uint8_t> p;
    put_field(p, str_content(m.user_id));
    put_field(p, u32_content(m.biohash_len));
    put_field(p, u32_content(m.flags));
    put_field(p, ctvec_content(m.cts));
    put_field(p, str_content(m.sig.signer_id));
    put_field(p, uint_content(m.sig.value));
    return finish_frame(Type::Enroll, p);
  }
  std::vector<uint8_t> operator()(const EnrollAckMsg& m) const {
    std::vector<uint8_t> p;
    put_field(p, u32_content(m.status));
    return finish_frame(Type::EnrollAck, p);
  }
  std::vector<uint8_t> operator()(const AuthReqMsg& m) const {
    std::vector<uint8_t> p;
    put_field(p, str_content(m.user_id));
    put_field(p, bitvec_content(m.r_masked));
    put_field(p, nonce_content(m.nonce_user));
    return finish_frame(Type::AuthReq, p);
  }
  std::vector<uint8_t> operator()(const AuthChallengeMsg& m) const {
    std::vector<uint8_t> p;
    put_field(p, ctvec_content(m.cts));
    put_field(p, str_content(m.sig.signer_id));
    put_field(p, uint_content(m.sig.value));
    put_field(p, nonce_content(m.nonce_verifier));
    return finish_frame(Type::AuthChallenge, p);
  }
  std::vector<uint8_t> operator()(const AuthResponseMsg& m) const {
    std::vector<uint8_t> p;
    put_field(p, ctvec_content(m.enc_r));
    put_field(p, ctvec_content(m.t1));
    put_field(p, nonce_content(m.nonce_user));
    put_field(p, nonce_content(m.nonce_verifier));
    put_field(p, str_content(m.sig.signer_id));
    put_field(p, uint_content(m.sig.value));
    return finish_frame(Type::AuthResponse, p);
  }
  std::vector<uint8_t> operator()(const DecisionMsg& m) const {
    std::vector<uint8_t> p;
    put_field(p, u32_content(m.accept ? 1 : 0));
    put_field(p, nonce_content(m.nonce_user));
    put_field(p, nonce_content(m.nonce_verifier));
    put_field(p, str_content(m.sig.signer_id));
    put_field(p, uint_content(m.sig.value));
    return finish_frame(Type::Decision, p);
  }
  std::vector<uint8_t> operator()(const ErrorMsg& m) const {
    std::vector<uint8_t> p;
    put_field(p, u32_content(static_cast<uint32_t>(m.error_class)));
    // Constant-shape padding: every failure looks the same on the wire.
    std::vector<uint8_t> pad(32, 0);
    put_field(p, pad);
    return finish_frame(Type::Error, p);
  }
};

}  // namespace

std::vector<uint8_t> encode(const Message& msg) {
  return std::visit(Encoder{}, msg);
}

uint32_t parse_frame_header(std::span<const uint8_t> header, uint8_t& type_out) {
  if (header.size() != kHeaderSize) throw WireError("frame header has wrong size");
  if (!std::equal(kMagic.begin(), kMagic.end(), header.begin())) throw WireError("bad magic");
  if (header[4] != kVersion) throw WireError("unsupported version");
  type_out = header[5];
  uint32_t len = read_u32(header, 6);
  if (len > kMaxPayload) throw WireError("payload length exceeds cap");
  return len;
}

Type peek_type(std::span<const uint8_t> frame) {
  if (frame.size() < kHeaderSize) throw WireError("truncated frame");
  uint8_t t = 0;
  parse_frame_header(frame.first(kHeaderSize), t);
  return static_cast<Type>(t);
}

Message decode(std::span<const uint8_t> frame) {
  if (frame.size() < kHeaderSize) throw WireError("truncated frame");
  uint8_t type_byte = 0;
  uint32_t len = parse_frame_header(frame.first(kHeaderSize), type_byte);
  if (frame.size() != kHeaderSize + len) throw WireError("frame length mismatch");
  Reader r(frame.subspan(kHeaderSize));

  switch (static_cast<Type>(type_byte)) {
    case Type::Enroll: {
      EnrollMsg m;
      m.user_id = parse_str(r.field());
      m.biohash_len = parse_u32(r.field());
      m.flags = parse_u32(r.field());
      if (m.flags > 1) throw WireError("enroll flags must be 0 or 1");
      m.cts = parse_ctvec(r.field());
      m.sig.signer_id = parse_str(r.field());
      m.sig.value = parse_uint(r.field());
      r.finish();
      return m;
    }
    case Type::EnrollAck: {
      EnrollAckMsg m;
      m.status = parse_u32(r.field());
      r.finish();
      return m;
    }
    case Type::AuthReq: {
      AuthReqMsg m;
      m.user_id = parse_str(r.field());
      m.r_masked = parse_bitvec(r.field());
      m.nonce_user = parse_nonce(r.field());
      r.finish();
      return m;
    }
    case Type::AuthChallenge: {
      AuthChallengeMsg m;
      m.cts = parse_ctvec(r.field());
      m.sig.signer_id = parse_str(r.field());
      m.sig.value = parse_uint(r.field());
      m.nonce_verifier = parse_nonce(r.field());
      r.finish();
      return m;
    }
    case Type::AuthResponse: {
      AuthResponseMsg m;
      m.enc_r = parse_ctvec(r.field());
      m.t1 = parse_ctvec(r.field());
      m.nonce_user = parse_nonce(r.field());
      m.nonce_verifier = parse_nonce(r.field());
      m.sig.signer_id = parse_str(r.field());
      m.sig.value = parse_uint(r.field());
      r.finish();
      return m;
    }
    case Type::Decision: {
      DecisionMsg m;
      uint32_t verdict = parse_u32(r.field());
      if (verdict > 1) throw WireError("decision verdict must be 0 or 1");
      m.accept = verdict == 1;
      m.nonce_user = parse_nonce(r.field());
      m.nonce_verifier = parse_nonce(r.field());
      m.sig.signer_id = parse_str(r.field());
      m.sig.value = parse_uint(r.field());
      r.finish();
      return m;
    }
    case Type::Error: {
      ErrorMsg m;
      uint32_t cls = parse_u32(r.field());
      if (cls < 1 || cls > 5) throw WireError("unknown error class");
      m.error_class = static_cast<ErrorClass>(cls);
      std::span<const uint8_t> pad = r.field();
      if (pad.size() != 32) throw WireError("error padding has wrong size");
      for (uint8_t b : pad) {
        if (b != 0) throw WireError("error padding must be zero");
      }
      r.finish();
      return m;
    }
    default:
      throw WireError("unknown frame type");
  }
}

std::vector<uint8_t> enroll_signing_bytes(const CtVector& cts) {
  return ctvec_content(cts);
}

std::vector<uint8_t> response_signing_bytes(const CtVector& enc_r, const CtVector& t1,
                                            const Nonce& nonce_user, const Nonce& nonce_verifier) {
  std::vector<uint8_t> out = ctvec_content(enc_r);
  std::vector<uint8_t> rest = ctvec_content(t1);
  out.insert(out.end(), rest.begin(), rest.end());
  rest = nonce_content(nonce_user);
  out.insert(out.end(), rest.begin(), rest.end());
  rest = nonce_content(nonce_verifier);
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

std::vector<uint8_t> decision_signing_bytes(bool accept, const Nonce& nonce_user,
                                            const Nonce& nonce_verifier) {
  std::vector<uint8_t> out;
  out.push_back(accept ? 1 : 0);
  std::vector<uint8_t> rest = nonce_content(nonce_user);
  out.insert(out.end(), rest.begin(), rest.end());
  rest = nonce_content(nonce_verifier);
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

}  // namespace thrive::wire
