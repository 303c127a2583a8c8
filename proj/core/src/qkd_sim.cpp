#include "tpmr/qkd_sim.hpp"

#include <bit>
#include <cmath>
#include <numeric>
#include <vector>

#include "tpmr/error.hpp"
#include "tpmr/rng.hpp"

namespace tpmr {

namespace {

// First `count` entries of a partial Fisher-Yates shuffle of [0, n).
std::vector<std::size_t> sample_positions(std::size_t n, std::size_t count, SplitMix64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace

std::size_t error_count_for(std::size_t length_bits, double qber) {
  return static_cast<std::size_t>(std::llround(qber * static_cast<double>(length_bits)));
}

KeyPair generate_pair(std::size_t length_bits, double qber, std::uint64_t seed) {
  if (length_bits == 0) throw Error(ErrorCode::kInvalidArgument, "key length must be >= 1 bit");
  if (!(qber >= 0.0 && qber <= 0.5)) {
    throw Error(ErrorCode::kInvalidArgument, "QBER must lie in [0, 0.5]");
  }
  SplitMix64 rng(seed);
  KeyMaterial a(length_bits);
  for (std::size_t i = 0; i < length_bits; ++i) {
    if (rng() >> 63) a.set_bit(i, true);
  }
  KeyMaterial b = a;
  const std::size_t errors = error_count_for(length_bits, qber);
  for (const auto pos : sample_positions(length_bits, errors, rng)) b.flip(pos);
  return {std::move(a), std::move(b), errors};
}

QberEstimate estimate_qber(const KeyMaterial& key_a, const KeyMaterial& key_b,
                           double sample_fraction, std::uint64_t seed) {
  const std::size_t length = key_a.length_bits();
  if (key_b.length_bits() != length) {
    throw Error(ErrorCode::kStructural, "keys must have equal length");
  }
  if (!(sample_fraction > 0.0 && sample_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidSample, "sample fraction must lie in (0, 1)");
  }
  const auto sample_size =
      static_cast<std::size_t>(std::llround(sample_fraction * static_cast<double>(length)));
  if (sample_size == 0 || sample_size >= length) {
    throw Error(ErrorCode::kInvalidSample,
                "sample of " + std::to_string(sample_size) + " bits from a " +
                    std::to_string(length) + "-bit key leaves nothing to compare or keep");
  }
  SplitMix64 rng(seed);
  std::vector<bool> disclosed(length, false);
  std::size_t mismatches = 0;
  for (const auto pos : sample_positions(length, sample_size, rng)) {
    disclosed[pos] = true;
    if (key_a.bit(pos) != key_b.bit(pos)) ++mismatches;
  }
  QberEstimate out;
  out.estimate = static_cast<double>(mismatches) / static_cast<double>(sample_size);
  out.sample_size = sample_size;
  out.remaining_a = KeyMaterial(length - sample_size);
  out.remaining_b = KeyMaterial(length - sample_size);
  std::size_t j = 0;
  for (std::size_t i = 0; i < length; ++i) {
    if (disclosed[i]) continue;
    out.remaining_a.set_bit(j, key_a.bit(i));
    out.remaining_b.set_bit(j, key_b.bit(i));
    ++j;
  }
  return out;
}

std::size_t hamming_distance(const KeyMaterial& a, const KeyMaterial& b) {
  if (a.length_bits() != b.length_bits()) {
    throw Error(ErrorCode::kStructural, "hamming distance needs equal lengths");
  }
  std::size_t d = 0;
  const auto ba = a.bytes();
  const auto bb = b.bytes();
  for (std::size_t i = 0; i < ba.size(); ++i) {
    d += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(ba[i] ^ bb[i])));
  }
  return d;
}

}  // namespace tpmr
