#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tpmr/protocol/messages.hpp"

namespace tpmr::protocol {

inline constexpr std::chrono::milliseconds kDefaultTimeout{30'000};

/// Blocking, reliable, ordered byte stream. Failures and timeouts throw
/// Error(kTransport).
class ByteStream {
 public:
  virtual ~ByteStream() = default;
  virtual void write_all(std::span<const std::uint8_t> bytes) = 0;
  virtual void read_exact(std::span<std::uint8_t> buffer) = 0;
};

class TcpStream final : public ByteStream {
 public:
  static TcpStream connect(const std::string& host, std::uint16_t port,
                           std::chrono::milliseconds timeout = kDefaultTimeout);

  TcpStream(TcpStream&& other) noexcept;
  TcpStream& operator=(TcpStream&& other) noexcept;
  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;
  ~TcpStream() override;

  void write_all(std::span<const std::uint8_t> bytes) override;
  void read_exact(std::span<std::uint8_t> buffer) override;

 private:
  friend class TcpListener;
  TcpStream(int fd, std::chrono::milliseconds timeout) : fd_(fd), timeout_(timeout) {}

  int fd_ = -1;
  std::chrono::milliseconds timeout_;
};

class TcpListener {
 public:
  /// Port 0 picks an ephemeral port; see port().
  TcpListener(const std::string& host, std::uint16_t port);
  TcpListener(TcpListener&& other) noexcept;
  TcpListener& operator=(TcpListener&&) = delete;
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;
  ~TcpListener();

  std::uint16_t port() const noexcept { return port_; }
  TcpStream accept(std::chrono::milliseconds timeout = kDefaultTimeout);

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

/// "host:port" -> (host, port). Throws Error(kInvalidArgument).
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint);

/// Two connected in-process endpoints.
std::pair<std::unique_ptr<ByteStream>, std::unique_ptr<ByteStream>> make_memory_pipe(
    std::chrono::milliseconds timeout = kDefaultTimeout);

/// Wraps a stream and records every byte written through it.
class RecordingStream final : public ByteStream {
 public:
  explicit RecordingStream(ByteStream& inner) : inner_(inner) {}

  void write_all(std::span<const std::uint8_t> bytes) override;
  void read_exact(std::span<std::uint8_t> buffer) override { inner_.read_exact(buffer); }

  std::vector<std::uint8_t> written() const;

 private:
  ByteStream& inner_;
  mutable std::mutex mutex_;
  std::vector<std::uint8_t> written_;
};

void write_message(ByteStream& stream, const Message& message);
Message read_message(ByteStream& stream);

}  // namespace tpmr::protocol
