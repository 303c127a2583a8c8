#pragma once

#include <stdexcept>

#include "tpmr/key.hpp"
#include "tpmr/protocol/session.hpp"
#include "tpmr/protocol/transport.hpp"

namespace tpmr::protocol {

class SessionAborted : public std::runtime_error {
 public:
  SessionAborted(AbortReason reason, bool by_peer);

  AbortReason reason() const noexcept { return reason_; }
  bool by_peer() const noexcept { return by_peer_; }

 private:
  AbortReason reason_;
  bool by_peer_;
};

/// Drives one endpoint over a byte stream until Done. Throws SessionAborted
/// when either side aborts and Error(kTransport) on stream failure.
SessionResult run_session(const KeyMaterial& key, const SessionConfig& config, ByteStream& stream);

}  // namespace tpmr::protocol
