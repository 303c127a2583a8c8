#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "tpmr/protocol/messages.hpp"

namespace tpmr::protocol {

// Frame: 'T' 'P', version, message type, u32be payload length, payload.
inline constexpr std::uint8_t kMagic0 = 0x54;
inline constexpr std::uint8_t kMagic1 = 0x50;
inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::size_t kHeaderSize = 8;
inline constexpr std::uint32_t kMaxPayload = 1U << 20;

std::vector<std::uint8_t> encode_frame(const Message& message);

/// Decodes exactly one complete frame. Throws Error(kProtocolViolation) on a
/// malformed header or payload, or if `frame` has trailing bytes.
Message decode_frame(std::span<const std::uint8_t> frame);

/// Payload length announced by a header, after validating magic/version/type.
std::uint32_t parse_header(std::span<const std::uint8_t, kHeaderSize> header);

/// Accumulates stream bytes and yields whole frames only.
class FrameDecoder {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  std::optional<Message> next();
  std::size_t buffered() const noexcept { return buffer_.size(); }

 private:
  std::deque<std::uint8_t> buffer_;
};

}  // namespace tpmr::protocol
