#pragma once

#include <atomic>
#include <condition_variable>
#include <memory>
#include <ostream>
#include <thread>

#include "thrive/config.hpp"
#include "thrive/store.hpp"
#include "thrive/transport.hpp"

namespace thrive::svc {

// Verifier daemon: accepts stream connections, runs one protocol session per
// connection (an enrollment or one authentication), answers failures with an
// ERROR frame, and closes. Sessions above the concurrency cap wait their
// turn. Log lines are key=value; identifiers appear only as truncated hashes.
class VerifierService {
 public:
  VerifierService(ServiceConfig cfg, store::KeyStore keys, std::ostream& log);
  ~VerifierService();

  void start();  // binds and spawns the acceptor; returns once listening
  void stop();   // closes the listener and waits for in-flight sessions
  uint16_t port() const { return port_; }

  // Runs a full session on an existing channel; used directly by tests.
  void handle_session(net::FrameChannel& ch);

  proto::VerifierConfig protocol_config() const;

 private:
  void accept_loop();
  void log_event(const std::string& event, const std::string& detail);

  ServiceConfig cfg_;
  store::KeyStore keys_;
  store::EnrollmentStore records_;
  proto::ReplayCache replay_;
  std::ostream& log_;
  std::mutex log_mu_;

  int listen_fd_ = -1;
  uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex active_mu_;
  std::condition_variable active_cv_;
  uint32_t active_ = 0;
};

}  // namespace thrive::svc
