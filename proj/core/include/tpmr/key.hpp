#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tpmr {

/// A bit string with explicit length. Bits are packed MSB-first; the unused
/// low bits of the final byte are always zero.
class KeyMaterial {
 public:
  KeyMaterial() = default;
  /// Throws Error(kInvalidArgument) when length_bits == 0.
  explicit KeyMaterial(std::size_t length_bits);
  KeyMaterial(std::vector<std::uint8_t> bytes, std::size_t length_bits);

  std::size_t length_bits() const noexcept { return length_bits_; }
  std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }

  bool bit(std::size_t i) const {
    return (bytes_[i / 8] >> (7 - i % 8)) & 1U;
  }
  void set_bit(std::size_t i, bool value);
  void flip(std::size_t i) { set_bit(i, !bit(i)); }

  /// First `length_bits` bits as a new key.
  KeyMaterial prefix(std::size_t length_bits) const;

  /// "0101..." form, mostly for tests and diagnostics.
  static KeyMaterial from_bit_string(std::string_view bits);
  std::string to_bit_string() const;

  /// Lowercase hex of the packed bytes. When length_bits is not a multiple of
  /// 8 the final nibble(s) carry zero padding.
  std::string to_hex() const;
  /// Parses an even-length hex string. length_bits == 0 means 8 bits per
  /// byte; otherwise it must fit in the bytes given, with zero padding bits.
  static KeyMaterial from_hex(std::string_view hex, std::size_t length_bits = 0);

  friend bool operator==(const KeyMaterial&, const KeyMaterial&) = default;

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t length_bits_ = 0;
};

/// Key file format: one lowercase-hex key per line, optional trailing newline.
std::vector<KeyMaterial> read_key_lines(std::istream& in, std::size_t length_bits = 0);
void write_key_line(std::ostream& out, const KeyMaterial& key);

}  // namespace tpmr
