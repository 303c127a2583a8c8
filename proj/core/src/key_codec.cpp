#include "tpmr/key_codec.hpp"

#include <cmath>
#include <string>

#include "tpmr/error.hpp"

namespace tpmr {

namespace {

void check_bound(int bound) {
  if (bound < 1 || bound > kMaxWeightBound) {
    throw Error(ErrorCode::kInvalidArgument, "L must lie in [1, 100]");
  }
}

}  // namespace

int bits_per_weight(int bound) {
  check_bound(bound);
  const int symbols = 2 * bound + 1;
  int bits = 0;
  while ((1 << bits) < symbols) ++bits;
  return bits;
}

std::size_t weight_count(std::size_t key_length_bits, int bound) {
  const auto b = static_cast<std::size_t>(bits_per_weight(bound));
  return (key_length_bits + b - 1) / b;
}

std::vector<Structure> enumerate_structures(std::size_t key_length_bits, int bound) {
  const std::size_t b = static_cast<std::size_t>(bits_per_weight(bound));
  if (key_length_bits < b) {
    throw Error(ErrorCode::kInvalidArgument,
                "key of " + std::to_string(key_length_bits) + " bits is shorter than one weight");
  }
  const std::size_t count = weight_count(key_length_bits, bound);
  std::vector<Structure> out;
  for (std::size_t k = 1; k <= count; ++k) {
    if (count % k != 0) continue;
    const std::size_t n = count / k;
    if (k > kMaxDimension || n > kMaxDimension) continue;
    out.push_back({static_cast<int>(n), static_cast<int>(k)});
  }
  return out;
}

WeightMatrix encode(const KeyMaterial& key, const TpmParams& params) {
  params.validate();
  const int b = bits_per_weight(params.l);
  const std::size_t expected = weight_count(key.length_bits(), params.l);
  if (params.weight_count() != expected) {
    throw Error(ErrorCode::kStructural,
                std::to_string(key.length_bits()) + "-bit key at L=" + std::to_string(params.l) +
                    " yields " + std::to_string(expected) + " weights, but K*N = " +
                    std::to_string(params.weight_count()));
  }
  const int symbols = 2 * params.l + 1;
  std::vector<std::int8_t> values(expected);
  std::size_t pos = 0;
  for (auto& w : values) {
    int chunk = 0;
    for (int j = 0; j < b; ++j, ++pos) {
      const bool bit = pos < key.length_bits() && key.bit(pos);
      chunk = (chunk << 1) | static_cast<int>(bit);
    }
    w = static_cast<std::int8_t>(chunk % symbols - params.l);
  }
  return WeightMatrix(params, std::move(values));
}

KeyMaterial decode(const WeightMatrix& weights, std::size_t target_length_bits) {
  const int bound = weights.params().l;
  const int b = bits_per_weight(bound);
  const std::size_t available = weights.values().size() * static_cast<std::size_t>(b);
  if (target_length_bits == 0 || target_length_bits > available) {
    throw Error(ErrorCode::kStructural,
                "cannot decode " + std::to_string(target_length_bits) + " bits from " +
                    std::to_string(available) + " available");
  }
  KeyMaterial key(target_length_bits);
  std::size_t pos = 0;
  for (const auto w : weights.values()) {
    const int symbol = w + bound;
    for (int j = b - 1; j >= 0 && pos < target_length_bits; --j, ++pos) {
      if ((symbol >> j) & 1) key.set_bit(pos, true);
    }
    if (pos >= target_length_bits) break;
  }
  return key;
}

double leakage(std::size_t iterations, int bound) {
  check_bound(bound);
  return static_cast<double>(iterations) / std::log2(2.0 * bound + 1.0);
}

std::size_t reduction_bits(double z, int bound) {
  if (!(z >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "leakage must be non-negative");
  return static_cast<std::size_t>(std::ceil(z)) * static_cast<std::size_t>(bits_per_weight(bound));
}

KeyMaterial apply_reduction(const KeyMaterial& key, double z, int bound) {
  const std::size_t drop = reduction_bits(z, bound);
  if (drop >= key.length_bits()) {
    throw Error(ErrorCode::kEmptyKey,
                "reduction of " + std::to_string(drop) + " bits consumes the whole " +
                    std::to_string(key.length_bits()) + "-bit key");
  }
  if (drop == 0) return key;
  return key.prefix(key.length_bits() - drop);
}

}  // namespace tpmr
