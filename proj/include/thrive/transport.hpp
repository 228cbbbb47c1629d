#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace thrive::net {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Moves whole frames and keeps byte tallies. recv_frame() validates the
// header before trusting the length, so a garbage stream dies early instead
// of allocating whatever the peer claims.
class FrameChannel {
 public:
  virtual ~FrameChannel() = default;
  virtual void send_frame(std::span<const uint8_t> frame) = 0;
  virtual std::vector<uint8_t> recv_frame() = 0;
  virtual void close() {}

  uint64_t bytes_sent() const { return bytes_sent_; }
  uint64_t bytes_received() const { return bytes_received_; }

 protected:
  uint64_t bytes_sent_ = 0;
  uint64_t bytes_received_ = 0;
};

// Blocking channel over a connected stream socket. Owns the fd.
class TcpChannel : public FrameChannel {
 public:
  explicit TcpChannel(int fd) : fd_(fd) {}
  ~TcpChannel() override;
  void send_frame(std::span<const uint8_t> frame) override;
  std::vector<uint8_t> recv_frame() override;
  void close() override;

 private:
  void read_exact(uint8_t* buf, std::size_t len);
  int fd_ = -1;
};

// In-process pair of queues; make_loopback_pair() returns the two ends.
class LoopbackChannel : public FrameChannel {
 public:
  void send_frame(std::span<const uint8_t> frame) override;
  std::vector<uint8_t> recv_frame() override;
  void close() override;

  struct Shared;
  LoopbackChannel(std::shared_ptr<Shared> tx, std::shared_ptr<Shared> rx)
      : tx_(std::move(tx)), rx_(std::move(rx)) {}

 private:
  std::shared_ptr<Shared> tx_;
  std::shared_ptr<Shared> rx_;
};

std::pair<std::unique_ptr<LoopbackChannel>, std::unique_ptr<LoopbackChannel>> make_loopback_pair();

// "host:port" helpers; listen_on returns the listening fd and reports the
// actual port (useful when asked to bind port 0).
int listen_on(const std::string& addr, uint16_t& bound_port);
int connect_to(const std::string& addr);

}  // namespace thrive::net
