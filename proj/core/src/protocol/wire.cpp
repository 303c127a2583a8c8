#include "tpmr/protocol/wire.hpp"

#include <algorithm>
#include <string>

#include "tpmr/error.hpp"

namespace tpmr::protocol {

namespace {

[[noreturn]] void violation(const std::string& what) {
  throw Error(ErrorCode::kProtocolViolation, what);
}

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v >> 8));
    u8(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) u8(static_cast<std::uint8_t>(v >> shift));
  }
  void tau(std::int8_t t) { u8(t > 0 ? 0x01 : 0xFF); }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint16_t u16() {
    const auto hi = u8();
    return static_cast<std::uint16_t>((hi << 8) | u8());
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | u8();
    return v;
  }
  std::int8_t tau() {
    switch (u8()) {
      case 0x01: return 1;
      case 0xFF: return -1;
      default: violation("tau byte must be 0x01 or 0xFF");
    }
  }
  bool flag() {
    const auto v = u8();
    if (v > 1) violation("boolean byte must be 0 or 1");
    return v == 1;
  }
  template <std::size_t N>
  std::array<std::uint8_t, N> array() {
    need(N);
    std::array<std::uint8_t, N> out{};
    std::copy_n(in_.begin() + static_cast<std::ptrdiff_t>(pos_), N, out.begin());
    pos_ += N;
    return out;
  }
  std::vector<std::uint8_t> rest() {
    std::vector<std::uint8_t> out(in_.begin() + static_cast<std::ptrdiff_t>(pos_), in_.end());
    pos_ = in_.size();
    return out;
  }
  void finish() const {
    if (pos_ != in_.size()) violation("trailing bytes in payload");
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) violation("payload truncated");
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

struct PayloadEncoder {
  Writer& w;
  void operator()(const Hello& m) {
    w.u16(m.k);
    w.u16(m.n);
    w.u8(m.l);
    w.u32(m.key_length_bits);
    w.bytes(m.session_id);
  }
  void operator()(const HelloAck& m) { w.u8(m.accepted ? 1 : 0); }
  void operator()(const Input& m) {
    w.u32(m.iteration);
    w.u8(m.retry);
    w.tau(m.tau);
    w.bytes(m.packed_x);
  }
  void operator()(const Output& m) {
    w.u32(m.iteration);
    w.u8(m.retry);
    w.tau(m.tau);
  }
  void operator()(const DigestCheck& m) {
    w.u32(m.iteration);
    w.bytes(m.digest);
  }
  void operator()(const DigestAck& m) { w.u8(m.matched ? 1 : 0); }
  void operator()(const Done& m) { w.u32(m.iterations_used); }
  void operator()(const Abort& m) { w.u8(static_cast<std::uint8_t>(m.reason)); }
};

Message decode_payload(MessageType type, std::span<const std::uint8_t> payload) {
  Reader r(payload);
  Message out;
  switch (type) {
    case MessageType::kHello: {
      Hello m;
      m.k = r.u16();
      m.n = r.u16();
      m.l = r.u8();
      m.key_length_bits = r.u32();
      m.session_id = r.array<16>();
      out = m;
      break;
    }
    case MessageType::kHelloAck: out = HelloAck{r.flag()}; break;
    case MessageType::kInput: {
      Input m;
      m.iteration = r.u32();
      m.retry = r.u8();
      m.tau = r.tau();
      m.packed_x = r.rest();
      if (m.packed_x.empty()) violation("INPUT carries no input bits");
      out = std::move(m);
      break;
    }
    case MessageType::kOutput: {
      Output m;
      m.iteration = r.u32();
      m.retry = r.u8();
      m.tau = r.tau();
      out = m;
      break;
    }
    case MessageType::kDigest: {
      DigestCheck m;
      m.iteration = r.u32();
      m.digest = r.array<32>();
      out = m;
      break;
    }
    case MessageType::kDigestAck: out = DigestAck{r.flag()}; break;
    case MessageType::kDone: out = Done{r.u32()}; break;
    case MessageType::kAbort: {
      const auto code = r.u8();
      if (code < 1 || code > 4) violation("unknown abort reason " + std::to_string(code));
      out = Abort{static_cast<AbortReason>(code)};
      break;
    }
  }
  r.finish();
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const Message& message) {
  Writer payload;
  std::visit(PayloadEncoder{payload}, message);
  const auto body = payload.take();
  Writer frame;
  frame.u8(kMagic0);
  frame.u8(kMagic1);
  frame.u8(kVersion);
  frame.u8(static_cast<std::uint8_t>(type_of(message)));
  frame.u32(static_cast<std::uint32_t>(body.size()));
  frame.bytes(body);
  return frame.take();
}

std::uint32_t parse_header(std::span<const std::uint8_t, kHeaderSize> header) {
  if (header[0] != kMagic0 || header[1] != kMagic1) violation("bad frame magic");
  if (header[2] != kVersion) violation("unsupported frame version " + std::to_string(header[2]));
  if (header[3] < 0x01 || header[3] > 0x08) {
    violation("unknown message type " + std::to_string(header[3]));
  }
  const std::uint32_t length = (std::uint32_t{header[4]} << 24) | (std::uint32_t{header[5]} << 16) |
                               (std::uint32_t{header[6]} << 8) | std::uint32_t{header[7]};
  if (length > kMaxPayload) violation("payload length " + std::to_string(length) + " too large");
  return length;
}

Message decode_frame(std::span<const std::uint8_t> frame) {
  if (frame.size() < kHeaderSize) violation("frame shorter than header");
  const auto length = parse_header(frame.first<kHeaderSize>());
  if (frame.size() != kHeaderSize + length) violation("frame length does not match header");
  return decode_payload(static_cast<MessageType>(frame[3]), frame.subspan(kHeaderSize));
}

void FrameDecoder::feed(std::span<const std::uint8_t> bytes) {
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<Message> FrameDecoder::next() {
  if (buffer_.size() < kHeaderSize) return std::nullopt;
  std::array<std::uint8_t, kHeaderSize> header{};
  std::copy_n(buffer_.begin(), kHeaderSize, header.begin());
  const auto length = parse_header(header);
  if (buffer_.size() < kHeaderSize + length) return std::nullopt;
  std::vector<std::uint8_t> frame(buffer_.begin(),
                                  buffer_.begin() + static_cast<std::ptrdiff_t>(kHeaderSize + length));
  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(frame.size()));
  return decode_frame(frame);
}

}  // namespace tpmr::protocol
