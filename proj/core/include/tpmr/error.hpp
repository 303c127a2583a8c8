#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tpmr {

enum class ErrorCode {
  kInvalidArgument,
  kStructural,       // shape or size mismatch between operands
  kEmptyKey,         // leakage reduction would consume the whole key
  kInvalidSample,
  kTooFewSamples,
  kProtocolViolation,
  kTransport,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tpmr
