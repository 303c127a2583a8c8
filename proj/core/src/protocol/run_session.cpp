#include "tpmr/protocol/run_session.hpp"

#include <string>

#include "tpmr/error.hpp"

namespace tpmr::protocol {

SessionAborted::SessionAborted(AbortReason reason, bool by_peer)
    : std::runtime_error(std::string("session aborted") + (by_peer ? " by peer: " : ": ") +
                         std::string(to_string(reason))),
      reason_(reason),
      by_peer_(by_peer) {}

SessionResult run_session(const KeyMaterial& key, const SessionConfig& config, ByteStream& stream) {
  Session session(key, config);
  for (const auto& m : session.start()) write_message(stream, m);
  while (!session.finished()) {
    Message incoming;
    try {
      incoming = read_message(stream);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kProtocolViolation) throw;
      try {
        write_message(stream, Abort{AbortReason::kProtocolViolation});
      } catch (const Error&) {
        // The peer is already gone; the local abort still stands.
      }
      throw SessionAborted(AbortReason::kProtocolViolation, false);
    }
    for (const auto& m : session.step(incoming)) write_message(stream, m);
  }
  if (const auto aborted = session.aborted()) {
    throw SessionAborted(aborted->reason, aborted->by_peer);
  }
  return session.result();
}

}  // namespace tpmr::protocol
