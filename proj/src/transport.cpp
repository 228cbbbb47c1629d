#include "thrive/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

#include "thrive/wire.hpp"

namespace thrive::net {

TcpChannel::~TcpChannel() {
  close();
}

void TcpChannel::close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

void TcpChannel::send_frame(std::span<const uint8_t> frame) {
  if (fd_ < 0) throw TransportError("send on closed channel");
  std::size_t done = 0;
  while (done < frame.size()) {
    ssize_t n = ::send(fd_, frame.data() + done, frame.size() - done, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("send failed: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
  bytes_sent_ += frame.size();
}

void TcpChannel::read_exact(uint8_t* buf, std::size_t len) {
  std::size_t done = 0;
  while (done < len) {
    ssize_t n = ::recv(fd_, buf + done, len - done, 0);
    if (n == 0) throw TransportError("peer closed connection");
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("recv failed: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

std::vector<uint8_t> TcpChannel::recv_frame() {
  if (fd_ < 0) throw TransportError("recv on closed channel");
  std::vector<uint8_t> frame(wire::kHeaderSize);
  read_exact(frame.data(), frame.size());
  uint8_t type = 0;
  uint32_t payload_len = 0;
  try {
    payload_len = wire::parse_frame_header(frame, type);
  } catch (const wire::WireError& e) {
    throw TransportError(std::string("bad frame header: ") + e.what());
  }
  frame.resize(wire::kHeaderSize + payload_len);
  read_exact(frame.data() + wire::kHeaderSize, payload_len);
  bytes_received_ += frame.size();
  return frame;
}

struct LoopbackChannel::Shared {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::vector<uint8_t>> frames;
  bool closed = false;
};

void LoopbackChannel::send_frame(std::span<const uint8_t> frame) {
  {
    std::lock_guard<std::mutex> lock(tx_->mu);
    if (tx_->closed) throw TransportError("send on closed channel");
    tx_->frames.emplace_back(frame.begin(), frame.end());
  }
  tx_->cv.notify_all();
  bytes_sent_ += frame.size();
}

std::vector<uint8_t> LoopbackChannel::recv_frame() {
  std::unique_lock<std::mutex> lock(rx_->mu);
  rx_->cv.wait(lock, [&] { return !rx_->frames.empty() || rx_->closed; });
  if (rx_->frames.empty()) throw TransportError("peer closed connection");
  std::vector<uint8_t> frame = std::move(rx_->frames.front());
  rx_->frames.pop_front();
  bytes_received_ += frame.size();
  return frame;
}

void LoopbackChannel::close() {
  for (auto& side : {tx_, rx_}) {
    {
      std::lock_guard<std::mutex> lock(side->mu);
      side->closed = true;
    }
    side->cv.notify_all();
  }
}

std::pair<std::unique_ptr<LoopbackChannel>, std::unique_ptr<LoopbackChannel>> make_loopback_pair() {
  auto a = std::make_shared<LoopbackChannel::Shared>();
  auto b = std::make_shared<LoopbackChannel::Shared>();
  return {std::make_unique<LoopbackChannel>(a, b), std::make_unique<LoopbackChannel>(b, a)};
}

namespace {

std::pair<std::string, std::string> split_addr(const std::string& addr) {
  std::size_t colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == addr.size()) {
    throw TransportError("address must look like host:port: " + addr);
  }
  return {addr.substr(0, colon), addr.substr(colon + 1)};
}

}  // namespace

int listen_on(const std::string& addr, uint16_t& bound_port) {
  auto [host, port] = split_addr(addr);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  int rc = getaddrinfo(host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0) throw TransportError(std::string("resolve failed: ") + gai_strerror(rc));
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    int one = 1;
    setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
      sockaddr_storage ss{};
      socklen_t slen = sizeof(ss);
      if (getsockname(fd, reinterpret_cast<sockaddr*>(&ss), &slen) == 0) {
        if (ss.ss_family == AF_INET) {
          bound_port = ntohs(reinterpret_cast<sockaddr_in*>(&ss)->sin_port);
        } else if (ss.ss_family == AF_INET6) {
          bound_port = ntohs(reinterpret_cast<sockaddr_in6*>(&ss)->sin6_port);
        }
      }
      break;
    }
    ::close(fd);
    fd = -1;
  }
  freeaddrinfo(res);
  if (fd < 0) throw TransportError("cannot listen on " + addr);
  return fd;
}

int connect_to(const std::string& addr) {
  auto [host, port] = split_addr(addr);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  int rc = getaddrinfo(host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0) throw TransportError(std::string("resolve failed: ") + gai_strerror(rc));
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  freeaddrinfo(res);
  if (fd < 0) throw TransportError("cannot connect to " + addr);
  int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return fd;
}

}  // namespace thrive::net
