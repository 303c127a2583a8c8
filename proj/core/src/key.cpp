#include "tpmr/key.hpp"

#include <string>

#include "tpmr/error.hpp"

namespace tpmr {

namespace {

std::size_t bytes_for(std::size_t bits) { return (bits + 7) / 8; }

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

KeyMaterial::KeyMaterial(std::size_t length_bits)
    : bytes_(bytes_for(length_bits), 0), length_bits_(length_bits) {
  if (length_bits == 0) throw Error(ErrorCode::kInvalidArgument, "key length must be >= 1 bit");
}

KeyMaterial::KeyMaterial(std::vector<std::uint8_t> bytes, std::size_t length_bits)
    : bytes_(std::move(bytes)), length_bits_(length_bits) {
  if (length_bits == 0) throw Error(ErrorCode::kInvalidArgument, "key length must be >= 1 bit");
  if (bytes_.size() != bytes_for(length_bits)) {
    throw Error(ErrorCode::kStructural,
                std::to_string(length_bits) + "-bit key needs " +
                    std::to_string(bytes_for(length_bits)) + " bytes, got " +
                    std::to_string(bytes_.size()));
  }
  const unsigned spare = static_cast<unsigned>(bytes_.size() * 8 - length_bits);
  if (spare != 0 && (bytes_.back() & ((1U << spare) - 1U)) != 0) {
    throw Error(ErrorCode::kInvalidArgument, "padding bits beyond key length must be zero");
  }
}

void KeyMaterial::set_bit(std::size_t i, bool value) {
  if (i >= length_bits_) throw Error(ErrorCode::kStructural, "bit index out of range");
  const auto mask = static_cast<std::uint8_t>(0x80U >> (i % 8));
  if (value) {
    bytes_[i / 8] |= mask;
  } else {
    bytes_[i / 8] &= static_cast<std::uint8_t>(~mask);
  }
}

KeyMaterial KeyMaterial::prefix(std::size_t length_bits) const {
  if (length_bits > length_bits_) {
    throw Error(ErrorCode::kStructural, "prefix longer than key");
  }
  std::vector<std::uint8_t> out(bytes_.begin(),
                                bytes_.begin() + static_cast<std::ptrdiff_t>(bytes_for(length_bits)));
  const unsigned spare = static_cast<unsigned>(out.size() * 8 - length_bits);
  if (spare != 0) out.back() &= static_cast<std::uint8_t>(0xFFU << spare);
  return KeyMaterial(std::move(out), length_bits);
}

KeyMaterial KeyMaterial::from_bit_string(std::string_view bits) {
  KeyMaterial key(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != '0' && bits[i] != '1') {
      throw Error(ErrorCode::kInvalidArgument, "bit string may contain only 0 and 1");
    }
    key.set_bit(i, bits[i] == '1');
  }
  return key;
}

std::string KeyMaterial::to_bit_string() const {
  std::string out(length_bits_, '0');
  for (std::size_t i = 0; i < length_bits_; ++i) {
    if (bit(i)) out[i] = '1';
  }
  return out;
}

std::string KeyMaterial::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes_.size() * 2);
  for (const auto b : bytes_) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

KeyMaterial KeyMaterial::from_hex(std::string_view hex, std::size_t length_bits) {
  if (hex.empty() || hex.size() % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "hex key must have an even, non-zero digit count");
  }
  std::vector<std::uint8_t> bytes(hex.size() / 2);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(ErrorCode::kInvalidArgument, "invalid hex digit in key");
    bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  if (length_bits == 0) length_bits = bytes.size() * 8;
  return KeyMaterial(std::move(bytes), length_bits);
}

std::vector<KeyMaterial> read_key_lines(std::istream& in, std::size_t length_bits) {
  std::vector<KeyMaterial> keys;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    keys.push_back(KeyMaterial::from_hex(line, length_bits));
  }
  return keys;
}

void write_key_line(std::ostream& out, const KeyMaterial& key) {
  out << key.to_hex() << '\n';
}

}  // namespace tpmr
