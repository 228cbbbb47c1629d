#include "thrive/service.hpp"

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <stdexcept>

#include "thrive/hash.hpp"
#include "thrive/protocol.hpp"
#include "thrive/random.hpp"
#include "thrive/wire.hpp"

namespace thrive::svc {

namespace {

// Abandoned peers must not pin a session slot forever.
constexpr int kRecvTimeoutSecs = 30;

std::string session_tag(const wire::Nonce& n) {
  return hex_encode({n.session_id.data(), 4});
}

wire::ErrorMsg error_frame(wire::ErrorClass c) {
  wire::ErrorMsg e;
  e.error_class = c;
  return e;
}

}  // namespace

VerifierService::VerifierService(ServiceConfig cfg, store::KeyStore keys,
                                 std::ostream& log)
    : cfg_(std::move(cfg)),
      keys_(std::move(keys)),
      records_(cfg_.db_root + "/records"),
      log_(log) {}

VerifierService::~VerifierService() { stop(); }

proto::VerifierConfig VerifierService::protocol_config() const {
  proto::VerifierConfig pc;
  pc.mu = cfg_.mu > 0 ? cfg_.mu : proto::default_mu(cfg_.biohash_len);
  pc.skew_secs = cfg_.skew_secs;
  return pc;
}

void VerifierService::start() {
  listen_fd_ = net::listen_on(cfg_.listen, port_);
  log_event("listening", "addr=" + cfg_.listen + " port=" + std::to_string(port_));
  acceptor_ = std::thread([this] { accept_loop(); });
}

void VerifierService::stop() {
  if (stopping_.exchange(true)) return;
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  if (acceptor_.joinable()) acceptor_.join();
  std::unique_lock lk(active_mu_);
  active_cv_.wait(lk, [this] { return active_ == 0; });
}

void VerifierService::accept_loop() {
  while (!stopping_.load()) {
    {
      std::unique_lock lk(active_mu_);
      active_cv_.wait(lk, [this] {
        return stopping_.load() || active_ < cfg_.max_sessions;
      });
      if (stopping_.load()) return;
    }
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (stopping_.load()) return;
      continue;
    }
    timeval tv{};
    tv.tv_sec = kRecvTimeoutSecs;
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    {
      std::lock_guard lk(active_mu_);
      ++active_;
    }
    std::thread([this, fd] {
      {
        net::TcpChannel ch(fd);
        try {
          handle_session(ch);
        } catch (const std::exception& ex) {
          log_event("session_error", std::string("what=") + ex.what());
        }
      }
      {
        std::lock_guard lk(active_mu_);
        --active_;
      }
      active_cv_.notify_all();
    }).detach();
  }
}

void VerifierService::log_event(const std::string& event,
                                const std::string& detail) {
  std::lock_guard lk(log_mu_);
  log_ << "event=" << event;
  if (!detail.empty()) log_ << ' ' << detail;
  log_ << '\n';
  log_.flush();
}

void VerifierService::handle_session(net::FrameChannel& ch) {
  SystemRandom rng;
  proto::VerifierConfig pc = protocol_config();
  proto::AuthSession session;
  bool session_armed = false;

  auto send_error = [&](wire::ErrorClass c) {
    try {
      ch.send_frame(wire::encode(error_frame(c)));
    } catch (const net::TransportError&) {
    }
  };

  for (;;) {
    std::vector<uint8_t> frame;
    try {
      frame = ch.recv_frame();
    } catch (const net::TransportError&) {
      return;  // peer gone; nothing to answer
    }

    try {
      wire::Message msg = wire::decode(frame);

      if (auto* enroll = std::get_if<wire::EnrollMsg>(&msg)) {
        const auto* entry = keys_.user(enroll->user_id);
        if (entry == nullptr) {
          log_event("enroll_reject",
                    "user=" + redact(enroll->user_id) + " cause=unknown_user");
          send_error(wire::ErrorClass::EnrollRejected);
          return;
        }
        proto::OpCounters ops;
        proto::EnrollmentRecord rec =
            proto::enroll_server(*enroll, entry->entry, ops);
        bool overwrite = (enroll->flags & 1u) != 0;
        if (overwrite && !records_.exists(enroll->user_id)) {
          log_event("enroll_reject", "user=" + redact(enroll->user_id) +
                                         " cause=nothing_to_replace");
          send_error(wire::ErrorClass::EnrollRejected);
          return;
        }
        records_.put(rec, overwrite);
        wire::EnrollAckMsg ack;
        ack.status = 0;
        ch.send_frame(wire::encode(ack));
        log_event("enrolled", "user=" + redact(enroll->user_id) +
                                  " bits=" + std::to_string(rec.biohash_len));
        return;
      }

      if (auto* req = std::get_if<wire::AuthReqMsg>(&msg)) {
        if (session_armed) {
          send_error(wire::ErrorClass::ProtocolViolation);
          return;
        }
        const auto* entry = keys_.user(req->user_id);
        auto rec = entry ? records_.get(req->user_id, entry->entry.user_sig_pub)
                         : std::nullopt;
        if (entry == nullptr || !rec.has_value()) {
          // Unknown user and missing enrollment answer identically so the
          // error channel cannot be used to probe the user directory.
          log_event("auth_reject", "user=" + redact(req->user_id) +
                                       " cause=no_enrollment");
          send_error(wire::ErrorClass::AuthFailed);
          return;
        }
        wire::AuthChallengeMsg challenge = proto::auth_round2_verifier(
            session, *req, *rec, entry->entry, keys_.identity(), pc, replay_,
            rng);
        session_armed = true;
        ch.send_frame(wire::encode(challenge));
        log_event("challenge_sent",
                  "user=" + redact(req->user_id) +
                      " session=" + session_tag(session.nonce_verifier));
        continue;
      }

      if (auto* resp = std::get_if<wire::AuthResponseMsg>(&msg)) {
        if (!session_armed) {
          send_error(wire::ErrorClass::ProtocolViolation);
          return;
        }
        proto::AuthDecision verdict =
            proto::auth_round4_verifier(session, *resp, keys_.identity(), pc);
        ch.send_frame(wire::encode(verdict.decision));
        log_event("decision",
                  "user=" + redact(session.user_id) +
                      " session=" + session_tag(session.nonce_verifier) +
                      " accept=" + std::to_string(verdict.accept ? 1 : 0) +
                      " reason=" + std::to_string(int(verdict.reason)));
        return;
      }

      // EnrollAck, Decision, AuthChallenge, Error: never valid client-to-server.
      send_error(wire::ErrorClass::ProtocolViolation);
      return;
    } catch (const wire::WireError& ex) {
      log_event("malformed", std::string("what=") + ex.what());
      send_error(wire::ErrorClass::MalformedFrame);
      return;
    } catch (const proto::ProtocolError& ex) {
      log_event("protocol_error", std::string("class=") +
                                      std::to_string(int(ex.error_class)) +
                                      " what=" + ex.what());
      send_error(ex.error_class);
      return;
    } catch (const store::StoreError& ex) {
      log_event("store_error", std::string("what=") + ex.what());
      send_error(ex.kind == store::StoreError::Kind::Duplicate
                     ? wire::ErrorClass::EnrollRejected
                     : wire::ErrorClass::Internal);
      return;
    }
  }
}

}  // namespace thrive::svc
