#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

namespace tpmr::protocol {

enum class MessageType : std::uint8_t {
  kHello = 0x01,
  kHelloAck = 0x02,
  kInput = 0x03,
  kOutput = 0x04,
  kDigest = 0x05,
  kDigestAck = 0x06,
  kDone = 0x07,
  kAbort = 0x08,
};

enum class AbortReason : std::uint8_t {
  kParameterMismatch = 1,
  kRetryExhausted = 2,
  kIterationBudget = 3,
  kProtocolViolation = 4,
};

std::string_view to_string(AbortReason reason) noexcept;

using SessionId = std::array<std::uint8_t, 16>;
using Digest32 = std::array<std::uint8_t, 32>;

struct Hello {
  std::uint16_t k = 0;
  std::uint16_t n = 0;
  std::uint8_t l = 0;
  std::uint32_t key_length_bits = 0;
  SessionId session_id{};
  friend bool operator==(const Hello&, const Hello&) = default;
};

struct HelloAck {
  bool accepted = false;
  friend bool operator==(const HelloAck&, const HelloAck&) = default;
};

struct Input {
  std::uint32_t iteration = 0;
  std::uint8_t retry = 0;
  std::int8_t tau = 1;
  std::vector<std::uint8_t> packed_x;
  friend bool operator==(const Input&, const Input&) = default;
};

struct Output {
  std::uint32_t iteration = 0;
  std::uint8_t retry = 0;
  std::int8_t tau = 1;
  friend bool operator==(const Output&, const Output&) = default;
};

struct DigestCheck {
  std::uint32_t iteration = 0;
  Digest32 digest{};
  friend bool operator==(const DigestCheck&, const DigestCheck&) = default;
};

struct DigestAck {
  bool matched = false;
  friend bool operator==(const DigestAck&, const DigestAck&) = default;
};

struct Done {
  std::uint32_t iterations_used = 0;
  friend bool operator==(const Done&, const Done&) = default;
};

struct Abort {
  AbortReason reason = AbortReason::kProtocolViolation;
  friend bool operator==(const Abort&, const Abort&) = default;
};

using Message =
    std::variant<Hello, HelloAck, Input, Output, DigestCheck, DigestAck, Done, Abort>;

MessageType type_of(const Message& message) noexcept;
std::string_view name_of(MessageType type) noexcept;

}  // namespace tpmr::protocol
