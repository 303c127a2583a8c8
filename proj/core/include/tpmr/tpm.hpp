#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tpmr/rng.hpp"

namespace tpmr {

// Largest supported weight bound; keeps |w| + 1 inside int8_t.
inline constexpr int kMaxWeightBound = 100;
inline constexpr int kMaxDimension = 0xFFFF;

/// Structure of a tree parity machine: K hidden units with N inputs each and
/// integer weights confined to [-L, L].
struct TpmParams {
  int k = 1;
  int n = 1;
  int l = 1;

  std::size_t weight_count() const noexcept {
    return static_cast<std::size_t>(k) * static_cast<std::size_t>(n);
  }

  /// Throws Error(kInvalidArgument) unless 1 <= K, N <= 65535 and 1 <= L <= 100.
  void validate() const;

  friend bool operator==(const TpmParams&, const TpmParams&) = default;
};

/// K x N weights stored row-major; row k feeds hidden unit k.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  explicit WeightMatrix(const TpmParams& params);
  WeightMatrix(const TpmParams& params, std::vector<std::int8_t> values);

  const TpmParams& params() const noexcept { return params_; }

  std::int8_t at(int k, int n) const { return values_[index(k, n)]; }
  void set(int k, int n, int value);

  std::span<const std::int8_t> row(int k) const {
    return {values_.data() + static_cast<std::size_t>(k) * params_.n,
            static_cast<std::size_t>(params_.n)};
  }
  std::span<const std::int8_t> values() const noexcept { return values_; }
  std::span<std::int8_t> mutable_values() noexcept { return values_; }

  static WeightMatrix random(const TpmParams& params, SplitMix64& rng);

  friend bool operator==(const WeightMatrix&, const WeightMatrix&) = default;

 private:
  std::size_t index(int k, int n) const {
    return static_cast<std::size_t>(k) * params_.n + static_cast<std::size_t>(n);
  }

  TpmParams params_;
  std::vector<std::int8_t> values_;
};

/// Shared ±1 stimulus for one exchange, K x N row-major.
class InputVector {
 public:
  InputVector() = default;
  InputVector(int k, int n, std::vector<std::int8_t> values);

  int k() const noexcept { return k_; }
  int n() const noexcept { return n_; }
  std::int8_t at(int k, int n) const {
    return values_[static_cast<std::size_t>(k) * n_ + static_cast<std::size_t>(n)];
  }
  std::span<const std::int8_t> values() const noexcept { return values_; }

  static InputVector random(int k, int n, SplitMix64& rng);

  /// +1 -> bit 1, -1 -> bit 0, row-major, MSB first, zero-padded last byte.
  std::vector<std::uint8_t> pack() const;
  static InputVector unpack(int k, int n, std::span<const std::uint8_t> packed);

  friend bool operator==(const InputVector&, const InputVector&) = default;

 private:
  int k_ = 0;
  int n_ = 0;
  std::vector<std::int8_t> values_;
};

struct TpmOutput {
  std::vector<std::int8_t> sigma;  // one entry per hidden unit, each ±1
  int tau = -1;                    // product of sigma

  friend bool operator==(const TpmOutput&, const TpmOutput&) = default;
};

/// Signum used by hidden units: zero maps to -1.
constexpr int tpm_sign(long z) noexcept { return z > 0 ? 1 : -1; }

/// Saturates z into [-bound, bound].
constexpr int clamp_weight(int z, int bound) noexcept {
  if (z <= -bound) return -bound;
  if (z >= bound) return bound;
  return z;
}

class TreeParityMachine {
 public:
  TreeParityMachine() = default;
  explicit TreeParityMachine(WeightMatrix weights) : weights_(std::move(weights)) {}

  const TpmParams& params() const noexcept { return weights_.params(); }
  const WeightMatrix& weights() const noexcept { return weights_; }

  /// Hidden-unit outputs and the network output for stimulus x. Pure.
  TpmOutput evaluate(const InputVector& x) const;

  /// Hebbian rule: every hidden unit whose sigma equals out.tau moves each of
  /// its weights by x * sigma, then clamps to [-L, L]. Units that disagree
  /// with tau are left alone. No tau-match guard between parties here; that
  /// belongs to the protocol.
  void hebbian_update(const InputVector& x, const TpmOutput& out);

  friend bool operator==(const TreeParityMachine&, const TreeParityMachine&) = default;

 private:
  WeightMatrix weights_;
};

struct WeightAgreement {
  std::size_t matching = 0;
  std::size_t total = 0;

  bool synchronized() const noexcept { return matching == total; }
  double fraction() const noexcept {
    return total == 0 ? 1.0 : static_cast<double>(matching) / static_cast<double>(total);
  }
  friend bool operator==(const WeightAgreement&, const WeightAgreement&) = default;
};

/// Positionwise weight agreement. Instrumentation only; never sent on the wire.
WeightAgreement weight_distance(const TreeParityMachine& a, const TreeParityMachine& b);

}  // namespace tpmr
