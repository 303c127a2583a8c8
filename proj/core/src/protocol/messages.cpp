#include "tpmr/protocol/messages.hpp"

namespace tpmr::protocol {

std::string_view to_string(AbortReason reason) noexcept {
  switch (reason) {
    case AbortReason::kParameterMismatch: return "ParameterMismatch";
    case AbortReason::kRetryExhausted: return "RetryExhausted";
    case AbortReason::kIterationBudget: return "IterationBudgetExhausted";
    case AbortReason::kProtocolViolation: return "ProtocolViolation";
  }
  return "Unknown";
}

MessageType type_of(const Message& message) noexcept {
  return static_cast<MessageType>(message.index() + 1);
}

std::string_view name_of(MessageType type) noexcept {
  switch (type) {
    case MessageType::kHello: return "HELLO";
    case MessageType::kHelloAck: return "HELLO_ACK";
    case MessageType::kInput: return "INPUT";
    case MessageType::kOutput: return "OUTPUT";
    case MessageType::kDigest: return "DIGEST";
    case MessageType::kDigestAck: return "DIGEST_ACK";
    case MessageType::kDone: return "DONE";
    case MessageType::kAbort: return "ABORT";
  }
  return "UNKNOWN";
}

}  // namespace tpmr::protocol
