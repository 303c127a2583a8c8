#pragma once

#include <cstddef>
#include <vector>

#include "tpmr/key.hpp"
#include "tpmr/tpm.hpp"

namespace tpmr {

/// Fewest bits that can represent 2L+1 distinct weight values.
int bits_per_weight(int bound);

/// Number of weights a key of `key_length_bits` fills at bound L (tail zero padded).
std::size_t weight_count(std::size_t key_length_bits, int bound);

/// One admissible machine shape for a key: N inputs per hidden unit, K units.
struct Structure {
  int n = 1;
  int k = 1;
  friend bool operator==(const Structure&, const Structure&) = default;
};

/// Every (N, K) with N * K == weight_count(key_length_bits, L), K ascending.
/// Degenerate shapes with K = 1 or N = 1 are included.
std::vector<Structure> enumerate_structures(std::size_t key_length_bits, int bound);

/// Splits the zero-padded key into big-endian chunks of bits_per_weight(L)
/// bits; chunk c becomes weight (c mod (2L+1)) - L, filling the matrix
/// row-major. Not invertible when 2^bits > 2L+1; decode(encode(k)) != k in
/// general and that is fine, both parties share the synchronized weights.
WeightMatrix encode(const KeyMaterial& key, const TpmParams& params);

/// Emits w + L as bits_per_weight(L) big-endian bits per weight, row-major,
/// truncated to target_length_bits.
KeyMaterial decode(const WeightMatrix& weights, std::size_t target_length_bits);

/// Information disclosed by `iterations` public exchanges, in (2L+1)-ary
/// symbols: log_{2L+1}(2^i) = i / log2(2L+1).
double leakage(std::size_t iterations, int bound);

/// Number of bits apply_reduction removes: ceil(Z) whole weights' worth.
std::size_t reduction_bits(double z, int bound);

/// Drops the trailing reduction_bits(Z, L) bits. Throws Error(kEmptyKey) when
/// nothing would remain.
KeyMaterial apply_reduction(const KeyMaterial& key, double z, int bound);

}  // namespace tpmr
