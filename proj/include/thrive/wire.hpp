#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "thrive/bigint.hpp"

namespace thrive::wire {

// Frame layout: "THRV" magic, version 0x01, type byte, 4-byte big-endian
// payload length, payload. The payload is a fixed sequence of fields per
// type, each field a 4-byte big-endian length followed by that many bytes.
// Every message has exactly one encoding; decode rejects anything else
// (trailing bytes, non-minimal integers, nonzero padding bits), which is what
// lets signatures cover encoded bytes directly.

constexpr std::array<uint8_t, 4> kMagic = {'T', 'H', 'R', 'V'};
constexpr uint8_t kVersion = 0x01;
constexpr std::size_t kHeaderSize = 10;
constexpr uint32_t kMaxPayload = 1u << 26;

enum class Type : uint8_t {
  Enroll = 0x01,
  AuthReq = 0x02,
  AuthChallenge = 0x03,
  AuthResponse = 0x04,
  Decision = 0x05,
  EnrollAck = 0x06,
  Error = 0x7F,
};

enum class ErrorClass : uint32_t {
  MalformedFrame = 1,
  ProtocolViolation = 2,
  AuthFailed = 3,  // covers unknown user, stale nonce, replay: one shape, one class
  EnrollRejected = 4,
  Internal = 5,
};

class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Nonce {
  std::string actor_id;
  std::array<uint8_t, 16> session_id{};
  uint64_t timestamp = 0;  // unsigned epoch seconds
  bool operator==(const Nonce&) const = default;
};

struct WireSignature {
  std::string signer_id;
  BigInt value;
  bool operator==(const WireSignature&) const = default;
};

// Ciphertext vectors ride as one field: count, fixed width (the byte length
// of N), then count back-to-back big-endian values.
struct CtVector {
  uint32_t width = 0;
  std::vector<BigInt> values;
  bool operator==(const CtVector&) const = default;
};

struct EnrollMsg {
  std::string user_id;
  uint32_t biohash_len = 0;
  uint32_t flags = 0;  // bit 0: overwrite an existing record
  CtVector cts;
  WireSignature sig;
  bool operator==(const EnrollMsg&) const = default;
};

struct EnrollAckMsg {
  uint32_t status = 0;  // 0 = stored
  bool operator==(const EnrollAckMsg&) const = default;
};

struct AuthReqMsg {
  std::string user_id;
  std::vector<uint8_t> r_masked;  // R = r XOR B_auth, one byte per bit
  Nonce nonce_user;
  bool operator==(const AuthReqMsg&) const = default;
};

struct AuthChallengeMsg {
  CtVector cts;
  WireSignature sig;  // the enrollment signature, replayed back to its maker
  Nonce nonce_verifier;
  bool operator==(const AuthChallengeMsg&) const = default;
};

struct AuthResponseMsg {
  CtVector enc_r;
  CtVector t1;
  Nonce nonce_user;
  Nonce nonce_verifier;
  WireSignature sig;
  bool operator==(const AuthResponseMsg&) const = default;
};

struct DecisionMsg {
  bool accept = false;
  Nonce nonce_user;
  Nonce nonce_verifier;
  WireSignature sig;
  bool operator==(const DecisionMsg&) const = default;
};

struct ErrorMsg {
  ErrorClass error_class = ErrorClass::Internal;
  bool operator==(const ErrorMsg&) const = default;
};

using Message = std::variant<EnrollMsg, EnrollAckMsg, AuthReqMsg, AuthChallengeMsg,
                             AuthResponseMsg, DecisionMsg, ErrorMsg>;

std::vector<uint8_t> encode(const Message& msg);
Message decode(std::span<const uint8_t> frame);

Type peek_type(std::span<const uint8_t> frame);

// Stream helper: returns the payload length after checking magic/version and
// the length cap. header must be kHeaderSize bytes.
uint32_t parse_frame_header(std::span<const uint8_t> header, uint8_t& type_out);

// Canonical byte strings the signatures cover.
std::vector<uint8_t> enroll_signing_bytes(const CtVector& cts);
std::vector<uint8_t> response_signing_bytes(const CtVector& enc_r, const CtVector& t1,
                                            const Nonce& nonce_user, const Nonce& nonce_verifier);
std::vector<uint8_t> decision_signing_bytes(bool accept, const Nonce& nonce_user,
                                            const Nonce& nonce_verifier);

}  // namespace thrive::wire
