#include "thrive/protocol.hpp"

#include <chrono>

namespace thrive::proto {

namespace {

uint32_t ct_width(const gm::GmPublicKey& pk) {
  return static_cast<uint32_t>(to_bytes_be(pk.N).size());
}

bool nonce_fresh(const wire::Nonce& n, uint64_t now, uint64_t skew) {
  uint64_t lo = std::min(n.timestamp, now);
  uint64_t hi = std::max(n.timestamp, now);
  return hi - lo <= skew;
}

}  // namespace

OpCounters& OpCounters::operator+=(const OpCounters& o) {
  encryptions += o.encryptions;
  share_exps += o.share_exps;
  ct_mults += o.ct_mults;
  combine_mults += o.combine_mults;
  sig_gen += o.sig_gen;
  sig_verify += o.sig_verify;
  jacobi_checks += o.jacobi_checks;
  decision_sig_gen += o.decision_sig_gen;
  decision_sig_verify += o.decision_sig_verify;
  return *this;
}

uint64_t now_epoch() {
  return static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());
}

wire::Nonce nonce_gen(const std::string& actor_id, RandomSource& rng, uint64_t now) {
  wire::Nonce n;
  n.actor_id = actor_id;
  rng.fill(n.session_id);
  n.timestamp = now;
  return n;
}

uint32_t default_mu(uint32_t biohash_len) {
  return biohash_len / 4;
}

bool ReplayCache::check_and_insert(const std::array<uint8_t, 16>& session_id, uint64_t now,
                                   uint64_t retain_secs) {
  std::lock_guard<std::mutex> lock(mu_);
  for (auto it = expiry_.begin(); it != expiry_.end();) {
    it = it->second <= now ? expiry_.erase(it) : std::next(it);
  }
  auto [it, inserted] = expiry_.try_emplace(session_id, now + retain_secs);
  return inserted;
}

wire::EnrollMsg enroll_client(const UserCredentials& creds, const bio::Biohash& b_enroll,
                              bool overwrite, RandomSource& rng, OpCounters& ops) {
  if (b_enroll.length() == 0) throw std::invalid_argument("enroll_client: empty biohash");
  wire::EnrollMsg msg;
  msg.user_id = creds.user_id;
  msg.biohash_len = static_cast<uint32_t>(b_enroll.length());
  msg.flags = overwrite ? 1 : 0;
  msg.cts.width = ct_width(creds.pk);
  msg.cts.values.reserve(b_enroll.length());
  for (uint8_t bit : b_enroll.bits) {
    msg.cts.values.push_back(gm::encrypt_bit(creds.pk, bit, rng).value);
    ops.encryptions += 1;
  }
  std::vector<uint8_t> signing = wire::enroll_signing_bytes(msg.cts);
  msg.sig.signer_id = creds.user_id;
  msg.sig.value = sig::sign(creds.user_sig.priv, signing, creds.user_id).value;
  ops.sig_gen += 1;
  return msg;
}

EnrollmentRecord enroll_server(const wire::EnrollMsg& msg, const VerifierUserEntry& entry,
                               OpCounters& ops) {
  if (msg.user_id != entry.user_id) {
    throw ProtocolError(wire::ErrorClass::EnrollRejected, "enrollment user id mismatch");
  }
  if (msg.biohash_len == 0 || msg.biohash_len != msg.cts.values.size()) {
    throw ProtocolError(wire::ErrorClass::EnrollRejected, "ciphertext count does not match length");
  }
  if (msg.cts.width != ct_width(entry.pk)) {
    throw ProtocolError(wire::ErrorClass::EnrollRejected, "ciphertext width does not match key");
  }
  sig::Signature s{msg.sig.value, msg.sig.signer_id};
  ops.sig_verify += 1;
  if (msg.sig.signer_id != entry.user_id ||
      !sig::verify(entry.user_sig_pub, wire::enroll_signing_bytes(msg.cts), s)) {
    throw ProtocolError(wire::ErrorClass::EnrollRejected, "enrollment signature check failed");
  }
  for (const BigInt& v : msg.cts.values) {
    ops.jacobi_checks += 1;
    if (!gm::validate(entry.pk, gm::GmCiphertext{v})) {
      throw ProtocolError(wire::ErrorClass::EnrollRejected, "ciphertext failed validation");
    }
  }
  return EnrollmentRecord{msg.user_id, msg.biohash_len, msg.cts, msg.sig};
}

wire::AuthReqMsg auth_round1_user(ClientAuthState& s, const UserCredentials& creds,
                                  const bio::Biohash& b_auth, RandomSource& rng, uint64_t now) {
  if (b_auth.length() == 0) throw std::invalid_argument("auth_round1_user: empty biohash");
  s.b_auth = b_auth;
  s.r.resize(b_auth.length());
  std::vector<uint8_t> pad = rng.bytes((b_auth.length() + 7) / 8);
  for (std::size_t i = 0; i < s.r.size(); ++i) {
    s.r[i] = (pad[i / 8] >> (7 - i % 8)) & 1;
  }
  s.nonce_user = nonce_gen(creds.user_id, rng, now);
  s.state = SessionState::AwaitChallenge;

  wire::AuthReqMsg req;
  req.user_id = creds.user_id;
  req.r_masked.resize(s.r.size());
  for (std::size_t i = 0; i < s.r.size(); ++i) {
    req.r_masked[i] = s.r[i] ^ s.b_auth.bits[i];
  }
  req.nonce_user = s.nonce_user;
  return req;
}

wire::AuthResponseMsg auth_round3_user(ClientAuthState& s, const UserCredentials& creds,
                                       const wire::AuthChallengeMsg& challenge,
                                       RandomSource& rng) {
  if (s.state != SessionState::AwaitChallenge) {
    throw ProtocolError(wire::ErrorClass::ProtocolViolation, "challenge arrived out of order");
  }
  std::size_t n = s.b_auth.length();
  if (challenge.cts.values.size() != n) {
    throw ProtocolError(wire::ErrorClass::ProtocolViolation, "challenge ciphertext count mismatch");
  }
  if (challenge.cts.width != ct_width(creds.pk)) {
    throw ProtocolError(wire::ErrorClass::ProtocolViolation, "challenge ciphertext width mismatch");
  }
  // The enrollment signature is the user's own; verifying it proves these are
  // the very ciphertexts she enrolled, so no per-ciphertext checks are needed.
  sig::Signature enroll_sig{challenge.sig.value, challenge.sig.signer_id};
  s.ops.sig_verify += 1;
  if (challenge.sig.signer_id != creds.user_id ||
      !sig::verify(creds.user_sig.pub, wire::enroll_signing_bytes(challenge.cts), enroll_sig)) {
    throw ProtocolError(wire::ErrorClass::AuthFailed, "challenge failed enrollment signature check");
  }
  s.nonce_verifier = challenge.nonce_verifier;

  wire::AuthResponseMsg resp;
  resp.enc_r.width = challenge.cts.width;
  resp.t1.width = challenge.cts.width;
  resp.enc_r.values.reserve(n);
  resp.t1.values.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    gm::GmCiphertext e = gm::encrypt_bit(creds.pk, s.r[j], rng);
    s.ops.encryptions += 1;
    gm::GmCiphertext c_prime =
        gm::hom_xor(creds.pk, e, gm::GmCiphertext{challenge.cts.values[j]});
    s.ops.ct_mults += 1;
    gm::DecryptionShare t1 = gm::partial_decrypt(creds.share1, c_prime, creds.pk.N);
    s.ops.share_exps += 1;
    resp.enc_r.values.push_back(e.value);
    resp.t1.values.push_back(t1.value);
  }
  resp.nonce_user = s.nonce_user;
  resp.nonce_verifier = s.nonce_verifier;
  std::vector<uint8_t> signing =
      wire::response_signing_bytes(resp.enc_r, resp.t1, resp.nonce_user, resp.nonce_verifier);
  resp.sig.signer_id = creds.user_id;
  resp.sig.value = sig::sign(creds.user_sig.priv, signing, creds.user_id).value;
  s.ops.sig_gen += 1;
  s.state = SessionState::AwaitResponse;
  return resp;
}

ClientOutcome auth_finish_user(ClientAuthState& s, const UserCredentials& creds,
                               const wire::DecisionMsg& decision) {
  ClientOutcome out;
  out.accept = decision.accept;
  if (decision.nonce_user != s.nonce_user || decision.nonce_verifier != s.nonce_verifier) {
    out.decision_valid = false;
    return out;
  }
  sig::Signature sig_obj{decision.sig.value, decision.sig.signer_id};
  std::vector<uint8_t> signing =
      wire::decision_signing_bytes(decision.accept, decision.nonce_user, decision.nonce_verifier);
  s.ops.decision_sig_verify += 1;
  out.decision_valid = sig::verify(creds.verifier_sig_pub, signing, sig_obj);
  s.state = SessionState::Decided;
  return out;
}

wire::AuthChallengeMsg auth_round2_verifier(AuthSession& s, const wire::AuthReqMsg& req,
                                            const EnrollmentRecord& record,
                                            const VerifierUserEntry& entry,
                                            const VerifierIdentity& identity,
                                            const VerifierConfig& cfg, ReplayCache& replay,
                                            RandomSource& rng, uint64_t now) {
  if (req.user_id != record.user_id || req.user_id != entry.user_id) {
    throw ProtocolError(wire::ErrorClass::AuthFailed, "request user id mismatch");
  }
  if (req.r_masked.size() != record.biohash_len) {
    throw ProtocolError(wire::ErrorClass::AuthFailed, "mask length does not match enrollment");
  }
  if (req.nonce_user.actor_id != req.user_id) {
    throw ProtocolError(wire::ErrorClass::AuthFailed, "nonce actor mismatch");
  }
  if (!nonce_fresh(req.nonce_user, now, cfg.skew_secs)) {
    throw ProtocolError(wire::ErrorClass::AuthFailed, "nonce timestamp outside skew window");
  }
  if (!replay.check_and_insert(req.nonce_user.session_id, now, 2 * cfg.skew_secs)) {
    throw ProtocolError(wire::ErrorClass::AuthFailed, "session id already seen");
  }

  s.state = SessionState::AwaitResponse;
  s.user_id = req.user_id;
  s.r_masked = req.r_masked;
  s.nonce_user = req.nonce_user;
  s.nonce_verifier = nonce_gen(identity.verifier_id, rng, now);
  s.entry = entry;
  s.enrolled_cts = record.cts;

  wire::AuthChallengeMsg challenge;
  challenge.cts = record.cts;
  challenge.sig = record.sig;
  challenge.nonce_verifier = s.nonce_verifier;
  return challenge;
}

AuthDecision auth_round4_verifier(AuthSession& s, const wire::AuthResponseMsg& resp,
                                  const VerifierIdentity& identity, const VerifierConfig& cfg) {
  if (s.state != SessionState::AwaitResponse) {
    throw ProtocolError(wire::ErrorClass::ProtocolViolation, "response arrived out of order");
  }
  s.state = SessionState::Decided;

  AuthDecision out;
  auto reject = [&](RejectReason why) -> AuthDecision& {
    out.accept = false;
    out.reason = why;
    return out;
  };

  const gm::GmPublicKey& pk = s.entry.pk;
  std::size_t n = s.enrolled_cts.values.size();
  bool ok = true;
  RejectReason why = RejectReason::None;

  if (resp.nonce_user != s.nonce_user || resp.nonce_verifier != s.nonce_verifier) {
    ok = false;
    why = RejectReason::NonceMismatch;
  }
  if (ok && (resp.enc_r.values.size() != n || resp.t1.values.size() != n ||
             resp.enc_r.width != s.enrolled_cts.width || resp.t1.width != s.enrolled_cts.width)) {
    ok = false;
    why = RejectReason::BadCiphertext;
  }
  if (ok) {
    // The signature is checked over the session's own nonces, so a response
    // lifted from another session cannot verify even if its fields parse.
    std::vector<uint8_t> signing =
        wire::response_signing_bytes(resp.enc_r, resp.t1, s.nonce_user, s.nonce_verifier);
    sig::Signature sig_obj{resp.sig.value, resp.sig.signer_id};
    s.ops.sig_verify += 1;
    if (resp.sig.signer_id != s.user_id ||
        !sig::verify(s.entry.user_sig_pub, signing, sig_obj)) {
      ok = false;
      why = RejectReason::BadSignature;
    }
  }
  if (ok) {
    for (std::size_t j = 0; j < n && ok; ++j) {
      s.ops.jacobi_checks += 1;
      if (!gm::validate(pk, gm::GmCiphertext{resp.enc_r.values[j]})) {
        ok = false;
        why = RejectReason::BadCiphertext;
      }
    }
  }
  if (ok) {
    for (std::size_t j = 0; j < n && ok; ++j) {
      const BigInt& t1v = resp.t1.values[j];
      if (t1v <= 0 || t1v >= pk.N) {
        ok = false;
        why = RejectReason::BadShare;
      }
    }
  }

  if (ok) {
    int distance = 0;
    try {
      for (std::size_t j = 0; j < n; ++j) {
        gm::GmCiphertext c_dprime = gm::hom_xor(pk, gm::GmCiphertext{resp.enc_r.values[j]},
                                                gm::GmCiphertext{s.enrolled_cts.values[j]});
        s.ops.ct_mults += 1;
        gm::DecryptionShare t2 = gm::partial_decrypt(s.entry.share2, c_dprime, pk.N);
        s.ops.share_exps += 1;
        gm::DecryptionShare t3 = gm::public_part(pk, c_dprime);
        s.ops.share_exps += 1;
        gm::DecryptionShare t1{resp.t1.values[j], 1};
        int t_bit = gm::combine(t3, t1, t2, pk.N);
        s.ops.combine_mults += 2;
        distance += s.r_masked[j] ^ t_bit;
      }
      out.distance = distance;
      if (distance <= static_cast<int>(cfg.mu)) {
        out.accept = true;
      } else {
        reject(RejectReason::OverThreshold);
      }
    } catch (const gm::CombineError&) {
      s.ops.combine_mults += 2;  // the failing combine still ran its chain
      reject(RejectReason::CombineFailure);
      out.distance = -1;
    }
  } else {
    reject(why);
  }

  wire::DecisionMsg d;
  d.accept = out.accept;
  d.nonce_user = s.nonce_user;
  d.nonce_verifier = s.nonce_verifier;
  std::vector<uint8_t> signing =
      wire::decision_signing_bytes(d.accept, d.nonce_user, d.nonce_verifier);
  d.sig.signer_id = identity.verifier_id;
  d.sig.value = sig::sign(identity.sig.priv, signing, identity.verifier_id).value;
  s.ops.decision_sig_gen += 1;
  out.decision = d;
  return out;
}

}  // namespace thrive::proto
