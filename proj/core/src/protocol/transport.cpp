#include "tpmr/protocol/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>

#include "tpmr/error.hpp"
#include "tpmr/protocol/wire.hpp"

namespace tpmr::protocol {

namespace {

[[noreturn]] void transport_error(const std::string& what) {
  throw Error(ErrorCode::kTransport, what);
}

[[noreturn]] void errno_error(const std::string& what) {
  transport_error(what + ": " + std::strerror(errno));
}

void wait_ready(int fd, short events, std::chrono::milliseconds timeout, const char* op) {
  pollfd pfd{fd, events, 0};
  for (;;) {
    const int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
    if (rc > 0) return;
    if (rc == 0) transport_error(std::string(op) + " timed out");
    if (errno != EINTR) errno_error(op);
  }
}

addrinfo* resolve(const std::string& host, std::uint16_t port, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* result = nullptr;
  const auto service = std::to_string(port);
  const int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints, &result);
  if (rc != 0) transport_error("cannot resolve " + host + ": " + ::gai_strerror(rc));
  return result;
}

// One direction of an in-memory pipe.
struct Channel {
  std::mutex mutex;
  std::condition_variable ready;
  std::deque<std::uint8_t> bytes;
  bool closed = false;
};

class MemoryStream final : public ByteStream {
 public:
  MemoryStream(std::shared_ptr<Channel> in, std::shared_ptr<Channel> out,
               std::chrono::milliseconds timeout)
      : in_(std::move(in)), out_(std::move(out)), timeout_(timeout) {}

  ~MemoryStream() override {
    std::lock_guard lock(out_->mutex);
    out_->closed = true;
    out_->ready.notify_all();
  }

  void write_all(std::span<const std::uint8_t> bytes) override {
    std::lock_guard lock(out_->mutex);
    out_->bytes.insert(out_->bytes.end(), bytes.begin(), bytes.end());
    out_->ready.notify_all();
  }

  void read_exact(std::span<std::uint8_t> buffer) override {
    std::unique_lock lock(in_->mutex);
    const bool ok = in_->ready.wait_for(lock, timeout_, [&] {
      return in_->bytes.size() >= buffer.size() || in_->closed;
    });
    if (!ok) transport_error("read timed out");
    if (in_->bytes.size() < buffer.size()) transport_error("peer closed the stream");
    std::copy_n(in_->bytes.begin(), buffer.size(), buffer.begin());
    in_->bytes.erase(in_->bytes.begin(), in_->bytes.begin() + static_cast<std::ptrdiff_t>(buffer.size()));
  }

 private:
  std::shared_ptr<Channel> in_;
  std::shared_ptr<Channel> out_;
  std::chrono::milliseconds timeout_;
};

}  // namespace

TcpStream TcpStream::connect(const std::string& host, std::uint16_t port,
                             std::chrono::milliseconds timeout) {
  addrinfo* list = resolve(host, port, false);
  std::string last_error = "no addresses";
  for (addrinfo* ai = list; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      ::freeaddrinfo(list);
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return TcpStream(fd, timeout);
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(list);
  transport_error("cannot connect to " + host + ":" + std::to_string(port) + ": " + last_error);
}

TcpStream::TcpStream(TcpStream&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), timeout_(other.timeout_) {}

TcpStream& TcpStream::operator=(TcpStream&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(other.fd_, -1);
    timeout_ = other.timeout_;
  }
  return *this;
}

TcpStream::~TcpStream() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpStream::write_all(std::span<const std::uint8_t> bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    wait_ready(fd_, POLLOUT, timeout_, "write");
    const auto n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      errno_error("write");
    }
    sent += static_cast<std::size_t>(n);
  }
}

void TcpStream::read_exact(std::span<std::uint8_t> buffer) {
  std::size_t got = 0;
  while (got < buffer.size()) {
    wait_ready(fd_, POLLIN, timeout_, "read");
    const auto n = ::recv(fd_, buffer.data() + got, buffer.size() - got, 0);
    if (n == 0) transport_error("peer closed the connection");
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      errno_error("read");
    }
    got += static_cast<std::size_t>(n);
  }
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
  addrinfo* list = resolve(host, port, true);
  std::string last_error = "no addresses";
  for (addrinfo* ai = list; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 4) == 0) {
      fd_ = fd;
      break;
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(list);
  if (fd_ < 0) transport_error("cannot listen on " + host + ":" + std::to_string(port) + ": " + last_error);

  sockaddr_storage addr{};
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  if (addr.ss_family == AF_INET) {
    port_ = ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  } else {
    port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
  }
}

TcpListener::TcpListener(TcpListener&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), port_(other.port_) {}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

TcpStream TcpListener::accept(std::chrono::milliseconds timeout) {
  wait_ready(fd_, POLLIN, timeout, "accept");
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) errno_error("accept");
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return TcpStream(fd, timeout);
}

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string::npos || colon + 1 == endpoint.size()) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint must look like host:port, got '" + endpoint + "'");
  }
  std::string host = endpoint.substr(0, colon);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') {
    host = host.substr(1, host.size() - 2);
  }
  if (host.empty()) throw Error(ErrorCode::kInvalidArgument, "missing host in '" + endpoint + "'");
  unsigned long port = 0;
  try {
    std::size_t used = 0;
    port = std::stoul(endpoint.substr(colon + 1), &used);
    if (used != endpoint.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "invalid port in '" + endpoint + "'");
  }
  if (port > 0xFFFF) throw Error(ErrorCode::kInvalidArgument, "port out of range in '" + endpoint + "'");
  return {host, static_cast<std::uint16_t>(port)};
}

std::pair<std::unique_ptr<ByteStream>, std::unique_ptr<ByteStream>> make_memory_pipe(
    std::chrono::milliseconds timeout) {
  auto ab = std::make_shared<Channel>();
  auto ba = std::make_shared<Channel>();
  return {std::make_unique<MemoryStream>(ba, ab, timeout),
          std::make_unique<MemoryStream>(ab, ba, timeout)};
}

void RecordingStream::write_all(std::span<const std::uint8_t> bytes) {
  {
    std::lock_guard lock(mutex_);
    written_.insert(written_.end(), bytes.begin(), bytes.end());
  }
  inner_.write_all(bytes);
}

std::vector<std::uint8_t> RecordingStream::written() const {
  std::lock_guard lock(mutex_);
  return written_;
}

void write_message(ByteStream& stream, const Message& message) {
  stream.write_all(encode_frame(message));
}

Message read_message(ByteStream& stream) {
  std::vector<std::uint8_t> frame(kHeaderSize);
  stream.read_exact(frame);
  const auto length = parse_header(std::span<const std::uint8_t, kHeaderSize>(frame.data(), kHeaderSize));
  frame.resize(kHeaderSize + length);
  if (length > 0) stream.read_exact(std::span(frame).subspan(kHeaderSize));
  return decode_frame(frame);
}

}  // namespace tpmr::protocol
