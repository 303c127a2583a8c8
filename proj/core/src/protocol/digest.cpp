#include "tpmr/protocol/digest.hpp"

#include <openssl/sha.h>

namespace tpmr::protocol {

std::vector<std::uint8_t> canonical_weights(const WeightMatrix& weights) {
  const auto& p = weights.params();
  std::vector<std::uint8_t> out;
  out.reserve(6 + weights.values().size());
  for (const int field : {p.k, p.n, p.l}) {
    out.push_back(static_cast<std::uint8_t>((field >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>(field & 0xFF));
  }
  for (const auto w : weights.values()) out.push_back(static_cast<std::uint8_t>(w));
  return out;
}

Digest32 weight_digest(const WeightMatrix& weights) {
  const auto bytes = canonical_weights(weights);
  Digest32 out{};
  SHA256(bytes.data(), bytes.size(), out.data());
  return out;
}

}  // namespace tpmr::protocol
