#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "tpmr/key.hpp"
#include "tpmr/protocol/messages.hpp"
#include "tpmr/rng.hpp"
#include "tpmr/tpm.hpp"

namespace tpmr::protocol {

enum class Role { kInitiator, kResponder };

struct SessionConfig {
  TpmParams params;
  std::size_t key_length_bits = 0;
  std::uint32_t max_iterations = 1000;
  std::uint32_t max_retries_per_iteration = 10;
  std::uint32_t digest_check_period = 1;
  Role role = Role::kInitiator;
  std::optional<std::uint64_t> rng_seed;  // initiator only; random_device if unset

  /// Throws Error(kInvalidArgument) on bad limits or a K*N that does not
  /// match the key length at bound L.
  void validate() const;
};

namespace phase {
struct Handshake {
  friend bool operator==(const Handshake&, const Handshake&) = default;
};
struct Syncing {
  std::uint32_t iteration = 0;
  std::uint32_t retry = 0;
  friend bool operator==(const Syncing&, const Syncing&) = default;
};
struct Verifying {
  std::uint32_t iteration = 0;
  friend bool operator==(const Verifying&, const Verifying&) = default;
};
struct Done {
  std::uint32_t iterations_used = 0;
  friend bool operator==(const Done&, const Done&) = default;
};
struct Aborted {
  AbortReason reason = AbortReason::kProtocolViolation;
  bool by_peer = false;
  friend bool operator==(const Aborted&, const Aborted&) = default;
};
}  // namespace phase

using SessionPhase =
    std::variant<phase::Handshake, phase::Syncing, phase::Verifying, phase::Done, phase::Aborted>;

struct SessionResult {
  KeyMaterial final_key;
  std::size_t iterations_used = 0;  // successful mutual updates
  std::size_t retries_total = 0;    // exchanges whose outputs disagreed
  double leakage_z = 0.0;
  friend bool operator==(const SessionResult&, const SessionResult&) = default;
};

/// One endpoint of a reconciliation session. Pure state machine: feed it
/// incoming messages, send whatever it returns. No I/O happens here.
///
/// Initiator                      Responder
///   HELLO          ------------>
///                  <------------  HELLO_ACK
///   INPUT(x, tau_A) ----------->  (evaluate, update if taus match)
///                  <------------  OUTPUT(tau_B)
///   ... every digest_check_period updates:
///   DIGEST         ------------>
///                  <------------  DIGEST_ACK
///   DONE           ------------>  (when matched)
class Session {
 public:
  Session(const KeyMaterial& key, SessionConfig config);

  /// Equivalent to step(nullopt): the initiator's opening HELLO. Empty for
  /// the responder.
  std::vector<Message> start();

  /// Advances on one incoming message and returns the replies. An illegal
  /// message yields ABORT{ProtocolViolation} and moves to Aborted.
  std::vector<Message> step(const Message& incoming);
  std::vector<Message> step(const std::optional<Message>& incoming);

  const SessionPhase& phase() const noexcept { return phase_; }
  bool finished() const noexcept;
  bool done() const noexcept { return std::holds_alternative<phase::Done>(phase_); }
  std::optional<phase::Aborted> aborted() const;

  const SessionConfig& config() const noexcept { return config_; }
  const TreeParityMachine& machine() const noexcept { return machine_; }
  const SessionId& session_id() const noexcept { return session_id_; }
  std::size_t retries_total() const noexcept { return retries_total_; }

  /// Reduced, decoded key. Throws Error(kProtocolViolation) if not Done and
  /// Error(kEmptyKey) if the leakage reduction consumes the key.
  SessionResult result() const;

 private:
  std::vector<Message> on_initiator(const Message& incoming);
  std::vector<Message> on_responder(const Message& incoming);
  Message next_input(std::uint32_t iteration, std::uint32_t retry);
  std::vector<Message> abort(AbortReason reason);

  SessionConfig config_;
  TreeParityMachine machine_;
  SessionPhase phase_ = phase::Handshake{};
  SessionId session_id_{};
  std::optional<SplitMix64> rng_;
  InputVector pending_x_;
  TpmOutput pending_out_;
  std::size_t retries_total_ = 0;
  bool started_ = false;
};

/// Called for every message crossing between the two in-memory endpoints.
using MessageObserver = std::function<void(Role sender, const Message&)>;

/// Runs two sessions against each other, passing every message through the
/// wire codec. Returns when both are finished.
void drive_pair(Session& initiator, Session& responder, const MessageObserver& observer = {});

}  // namespace tpmr::protocol
