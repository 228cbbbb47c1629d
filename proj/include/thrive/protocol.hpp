#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "thrive/biohash.hpp"
#include "thrive/random.hpp"
#include "thrive/signatures.hpp"
#include "thrive/threshold_gm.hpp"
#include "thrive/wire.hpp"

namespace thrive::proto {

// Enrollment is a single flow: the user encrypts her biohash bit by bit,
// signs the ciphertext vector, and the verifier stores what it can check.
// Authentication is four flows. The user masks a fresh biohash with a random
// pad r and sends the mask; the verifier answers with the stored ciphertexts
// under the user's own enrollment signature; the user re-randomizes them with
// encryptions of r and adds her half of the threshold decryption; the
// verifier finishes the decryption, which hands it r XOR enrolled-bit per
// position, so XORing with the mask reveals exactly the Hamming distance and
// nothing else about either template.

class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(wire::ErrorClass cls, const std::string& what)
      : std::runtime_error(what), error_class(cls) {}
  wire::ErrorClass error_class;
};

// Operation tallies, bumped at the protocol layer where each step happens.
// share_exps covers partial_decrypt and public_part calls; ct_mults counts
// homomorphic re-randomization products; combine_mults counts the raw
// multiplications inside three-share combines (two per bit). Decision
// signatures sit in their own buckets: they harden the last flow and are
// accounted separately from the core signature work.
struct OpCounters {
  uint64_t encryptions = 0;
  uint64_t share_exps = 0;
  uint64_t ct_mults = 0;
  uint64_t combine_mults = 0;
  uint64_t sig_gen = 0;
  uint64_t sig_verify = 0;
  uint64_t jacobi_checks = 0;
  uint64_t decision_sig_gen = 0;
  uint64_t decision_sig_verify = 0;

  OpCounters& operator+=(const OpCounters& o);
};

uint64_t now_epoch();

wire::Nonce nonce_gen(const std::string& actor_id, RandomSource& rng, uint64_t now);

// Everything the user keeps: her key share, her signing pair, and the
// verifier's signature public key for checking decisions.
struct UserCredentials {
  std::string user_id;
  gm::GmPublicKey pk;
  gm::GmKeyShare share1;
  sig::SigKeyPair user_sig;
  sig::SigPublicKey verifier_sig_pub;
};

// Verifier-side key material for one user. Holds share index 2 and only
// public signature material; share 1 and the user's signing key never get
// anywhere near the verifier.
struct VerifierUserEntry {
  std::string user_id;
  gm::GmPublicKey pk;
  gm::GmKeyShare share2;
  sig::SigPublicKey user_sig_pub;
};

struct VerifierIdentity {
  std::string verifier_id;
  sig::SigKeyPair sig;
};

struct EnrollmentRecord {
  std::string user_id;
  uint32_t biohash_len = 0;
  wire::CtVector cts;
  wire::WireSignature sig;
  bool operator==(const EnrollmentRecord&) const = default;
};

struct VerifierConfig {
  uint32_t mu = 0;
  uint64_t skew_secs = 120;
};

uint32_t default_mu(uint32_t biohash_len);  // floor(0.25 * len)

// Session id memory for replay rejection; entries live for twice the
// accepted clock-skew window. Thread safe.
class ReplayCache {
 public:
  bool check_and_insert(const std::array<uint8_t, 16>& session_id, uint64_t now,
                        uint64_t retain_secs);

 private:
  std::mutex mu_;
  std::map<std::array<uint8_t, 16>, uint64_t> expiry_;
};

// --- enrollment ----------------------------------------------------------

wire::EnrollMsg enroll_client(const UserCredentials& creds, const bio::Biohash& b_enroll,
                              bool overwrite, RandomSource& rng, OpCounters& ops);

// Checks the signature and every ciphertext; throws ProtocolError on any
// failure. Duplicate handling belongs to the store, not this step.
EnrollmentRecord enroll_server(const wire::EnrollMsg& msg, const VerifierUserEntry& entry,
                               OpCounters& ops);

// --- authentication, user side -------------------------------------------

enum class SessionState { AwaitChallenge, AwaitResponse, Decided };

struct ClientAuthState {
  bio::Biohash b_auth;
  std::vector<uint8_t> r;  // the pad; never leaves this struct
  wire::Nonce nonce_user;
  wire::Nonce nonce_verifier;
  SessionState state = SessionState::AwaitChallenge;
  OpCounters ops;
};

wire::AuthReqMsg auth_round1_user(ClientAuthState& s, const UserCredentials& creds,
                                  const bio::Biohash& b_auth, RandomSource& rng,
                                  uint64_t now = now_epoch());

wire::AuthResponseMsg auth_round3_user(ClientAuthState& s, const UserCredentials& creds,
                                       const wire::AuthChallengeMsg& challenge, RandomSource& rng);

struct ClientOutcome {
  bool accept = false;
  bool decision_valid = false;  // signature and nonce echo both checked out
};

ClientOutcome auth_finish_user(ClientAuthState& s, const UserCredentials& creds,
                               const wire::DecisionMsg& decision);

// --- authentication, verifier side ----------------------------------------

struct AuthSession {
  SessionState state = SessionState::AwaitChallenge;
  std::string user_id;
  std::vector<uint8_t> r_masked;
  wire::Nonce nonce_user;
  wire::Nonce nonce_verifier;
  VerifierUserEntry entry;
  wire::CtVector enrolled_cts;
  OpCounters ops;
};

// Validates the request, arms the session, and builds the challenge from the
// stored record. Throws ProtocolError (class AuthFailed) on stale or replayed
// nonces and on mask-length mismatch.
wire::AuthChallengeMsg auth_round2_verifier(AuthSession& s, const wire::AuthReqMsg& req,
                                            const EnrollmentRecord& record,
                                            const VerifierUserEntry& entry,
                                            const VerifierIdentity& identity,
                                            const VerifierConfig& cfg, ReplayCache& replay,
                                            RandomSource& rng, uint64_t now = now_epoch());

enum class RejectReason {
  None = 0,
  NonceMismatch,
  BadSignature,
  BadCiphertext,
  BadShare,
  CombineFailure,
  OverThreshold,
};

struct AuthDecision {
  bool accept = false;
  int distance = -1;  // filled only when the distance was actually computed
  RejectReason reason = RejectReason::None;
  wire::DecisionMsg decision;
};

// Runs the verifier's half of the threshold decryption and signs the verdict.
// Every failure yields a signed Reject; nothing in this step is silent.
AuthDecision auth_round4_verifier(AuthSession& s, const wire::AuthResponseMsg& resp,
                                  const VerifierIdentity& identity, const VerifierConfig& cfg);

}  // namespace thrive::proto
