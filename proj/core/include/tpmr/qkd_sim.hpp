#pragma once

#include <cstddef>
#include <cstdint>

#include "tpmr/key.hpp"

namespace tpmr {

/// Correlated keys standing in for sifted QKD output.
struct KeyPair {
  KeyMaterial key_a;
  KeyMaterial key_b;
  std::size_t true_error_count = 0;
};

/// Round half away from zero of qber * length_bits.
std::size_t error_count_for(std::size_t length_bits, double qber);

/// key_a is uniform; key_b flips exactly error_count_for(length, qber)
/// distinct, uniformly chosen positions. Deterministic in seed.
/// Requires 0 <= qber <= 0.5 and length_bits >= 1.
KeyPair generate_pair(std::size_t length_bits, double qber, std::uint64_t seed);

struct QberEstimate {
  double estimate = 0.0;
  std::size_t sample_size = 0;
  KeyMaterial remaining_a;
  KeyMaterial remaining_b;
};

/// Publicly compares round(sample_fraction * length) uniformly chosen
/// positions and discards them from both keys.
/// Throws Error(kInvalidSample) if the sample would be empty or the whole key.
QberEstimate estimate_qber(const KeyMaterial& key_a, const KeyMaterial& key_b,
                           double sample_fraction, std::uint64_t seed);

/// Throws Error(kStructural) on length mismatch.
std::size_t hamming_distance(const KeyMaterial& a, const KeyMaterial& b);

}  // namespace tpmr
