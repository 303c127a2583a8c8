#include "tpmr/tpm.hpp"

#include <string>

#include "tpmr/error.hpp"

namespace tpmr {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kStructural: return "StructuralError";
    case ErrorCode::kEmptyKey: return "EmptyKey";
    case ErrorCode::kInvalidSample: return "InvalidSample";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kProtocolViolation: return "ProtocolViolation";
    case ErrorCode::kTransport: return "TransportError";
  }
  return "Unknown";
}

void TpmParams::validate() const {
  if (k < 1 || k > kMaxDimension || n < 1 || n > kMaxDimension) {
    throw Error(ErrorCode::kInvalidArgument,
                "K and N must lie in [1, 65535], got K=" + std::to_string(k) +
                    " N=" + std::to_string(n));
  }
  if (l < 1 || l > kMaxWeightBound) {
    throw Error(ErrorCode::kInvalidArgument,
                "L must lie in [1, 100], got " + std::to_string(l));
  }
}

WeightMatrix::WeightMatrix(const TpmParams& params)
    : params_(params), values_(params.weight_count(), 0) {
  params_.validate();
}

WeightMatrix::WeightMatrix(const TpmParams& params, std::vector<std::int8_t> values)
    : params_(params), values_(std::move(values)) {
  params_.validate();
  if (values_.size() != params_.weight_count()) {
    throw Error(ErrorCode::kStructural,
                "weight matrix needs " + std::to_string(params_.weight_count()) +
                    " entries, got " + std::to_string(values_.size()));
  }
  for (const auto w : values_) {
    if (w < -params_.l || w > params_.l) {
      throw Error(ErrorCode::kInvalidArgument,
                  "weight " + std::to_string(w) + " outside [-L, L]");
    }
  }
}

void WeightMatrix::set(int k, int n, int value) {
  if (k < 0 || k >= params_.k || n < 0 || n >= params_.n) {
    throw Error(ErrorCode::kStructural, "weight index out of range");
  }
  if (value < -params_.l || value > params_.l) {
    throw Error(ErrorCode::kInvalidArgument,
                "weight " + std::to_string(value) + " outside [-L, L]");
  }
  values_[index(k, n)] = static_cast<std::int8_t>(value);
}

WeightMatrix WeightMatrix::random(const TpmParams& params, SplitMix64& rng) {
  WeightMatrix m(params);
  const auto span = static_cast<std::uint64_t>(2 * params.l + 1);
  for (auto& w : m.values_) {
    w = static_cast<std::int8_t>(static_cast<int>(rng.below(span)) - params.l);
  }
  return m;
}

InputVector::InputVector(int k, int n, std::vector<std::int8_t> values)
    : k_(k), n_(n), values_(std::move(values)) {
  if (k < 1 || n < 1 ||
      values_.size() != static_cast<std::size_t>(k) * static_cast<std::size_t>(n)) {
    throw Error(ErrorCode::kStructural, "input vector size does not match K x N");
  }
  for (const auto x : values_) {
    if (x != 1 && x != -1) {
      throw Error(ErrorCode::kInvalidArgument, "input entries must be +1 or -1");
    }
  }
}

InputVector InputVector::random(int k, int n, SplitMix64& rng) {
  const std::size_t count = static_cast<std::size_t>(k) * static_cast<std::size_t>(n);
  std::vector<std::int8_t> values(count);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (i % 64 == 0) word = rng();
    values[i] = (word >> (63 - i % 64)) & 1U ? 1 : -1;
  }
  return InputVector(k, n, std::move(values));
}

std::vector<std::uint8_t> InputVector::pack() const {
  std::vector<std::uint8_t> out((values_.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] > 0) out[i / 8] |= static_cast<std::uint8_t>(0x80U >> (i % 8));
  }
  return out;
}

InputVector InputVector::unpack(int k, int n, std::span<const std::uint8_t> packed) {
  const std::size_t count = static_cast<std::size_t>(k) * static_cast<std::size_t>(n);
  if (k < 1 || n < 1 || packed.size() != (count + 7) / 8) {
    throw Error(ErrorCode::kStructural, "packed input length does not match K x N");
  }
  std::vector<std::int8_t> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = (packed[i / 8] & (0x80U >> (i % 8))) ? 1 : -1;
  }
  return InputVector(k, n, std::move(values));
}

namespace {

void check_shape(const TpmParams& params, const InputVector& x) {
  if (x.k() != params.k || x.n() != params.n) {
    throw Error(ErrorCode::kStructural,
                "input is " + std::to_string(x.k()) + "x" + std::to_string(x.n()) +
                    ", machine is " + std::to_string(params.k) + "x" +
                    std::to_string(params.n));
  }
}

}  // namespace

TpmOutput TreeParityMachine::evaluate(const InputVector& x) const {
  const auto& p = params();
  check_shape(p, x);
  TpmOutput out;
  out.sigma.resize(static_cast<std::size_t>(p.k));
  int tau = 1;
  const auto w = weights_.values();
  const auto xs = x.values();
  for (int k = 0; k < p.k; ++k) {
    long field = 0;
    const std::size_t base = static_cast<std::size_t>(k) * p.n;
    for (int n = 0; n < p.n; ++n) field += w[base + n] * xs[base + n];
    const int s = tpm_sign(field);
    out.sigma[static_cast<std::size_t>(k)] = static_cast<std::int8_t>(s);
    tau *= s;
  }
  out.tau = tau;
  return out;
}

void TreeParityMachine::hebbian_update(const InputVector& x, const TpmOutput& out) {
  const auto& p = params();
  check_shape(p, x);
  if (out.sigma.size() != static_cast<std::size_t>(p.k)) {
    throw Error(ErrorCode::kStructural, "output has wrong number of hidden units");
  }
  auto w = weights_.mutable_values();
  const auto xs = x.values();
  for (int k = 0; k < p.k; ++k) {
    const int s = out.sigma[static_cast<std::size_t>(k)];
    if (s != out.tau) continue;
    const std::size_t base = static_cast<std::size_t>(k) * p.n;
    for (int n = 0; n < p.n; ++n) {
      w[base + n] = static_cast<std::int8_t>(clamp_weight(w[base + n] + xs[base + n] * s, p.l));
    }
  }
}

WeightAgreement weight_distance(const TreeParityMachine& a, const TreeParityMachine& b) {
  if (a.params() != b.params()) {
    throw Error(ErrorCode::kStructural, "weight_distance needs identical parameters");
  }
  WeightAgreement result;
  const auto wa = a.weights().values();
  const auto wb = b.weights().values();
  result.total = wa.size();
  for (std::size_t i = 0; i < wa.size(); ++i) {
    if (wa[i] == wb[i]) ++result.matching;
  }
  return result;
}

}  // namespace tpmr
