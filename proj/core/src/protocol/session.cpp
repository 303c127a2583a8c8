#include "tpmr/protocol/session.hpp"

#include <deque>
#include <random>
#include <string>

#include "tpmr/error.hpp"
#include "tpmr/key_codec.hpp"
#include "tpmr/protocol/digest.hpp"
#include "tpmr/protocol/wire.hpp"

namespace tpmr::protocol {

void SessionConfig::validate() const {
  params.validate();
  if (max_iterations < 1) throw Error(ErrorCode::kInvalidArgument, "max_iterations must be >= 1");
  if (max_retries_per_iteration < 1 || max_retries_per_iteration > 255) {
    throw Error(ErrorCode::kInvalidArgument, "max_retries_per_iteration must lie in [1, 255]");
  }
  if (digest_check_period < 1) {
    throw Error(ErrorCode::kInvalidArgument, "digest_check_period must be >= 1");
  }
  if (key_length_bits == 0 || key_length_bits > 0xFFFFFFFFULL) {
    throw Error(ErrorCode::kInvalidArgument, "key_length_bits must lie in [1, 2^32)");
  }
  const auto expected = weight_count(key_length_bits, params.l);
  if (params.weight_count() != expected) {
    throw Error(ErrorCode::kInvalidArgument,
                std::to_string(key_length_bits) + "-bit key at L=" + std::to_string(params.l) +
                    " needs K*N = " + std::to_string(expected) + ", got " +
                    std::to_string(params.k) + "*" + std::to_string(params.n));
  }
}

Session::Session(const KeyMaterial& key, SessionConfig config) : config_(std::move(config)) {
  config_.validate();
  if (key.length_bits() != config_.key_length_bits) {
    throw Error(ErrorCode::kStructural, "key length differs from the configured key_length_bits");
  }
  machine_ = TreeParityMachine(encode(key, config_.params));
  if (config_.role == Role::kInitiator) {
    rng_.emplace(config_.rng_seed ? *config_.rng_seed
                                  : (std::uint64_t{std::random_device{}()} << 32) ^
                                        std::random_device{}());
    for (std::size_t i = 0; i < session_id_.size(); i += 8) {
      const auto word = (*rng_)();
      for (std::size_t j = 0; j < 8; ++j) {
        session_id_[i + j] = static_cast<std::uint8_t>(word >> (56 - 8 * j));
      }
    }
  }
}

bool Session::finished() const noexcept {
  return std::holds_alternative<phase::Done>(phase_) ||
         std::holds_alternative<phase::Aborted>(phase_);
}

std::optional<phase::Aborted> Session::aborted() const {
  if (const auto* a = std::get_if<phase::Aborted>(&phase_)) return *a;
  return std::nullopt;
}

std::vector<Message> Session::start() {
  if (started_) return abort(AbortReason::kProtocolViolation);
  started_ = true;
  if (config_.role == Role::kResponder) return {};
  const auto& p = config_.params;
  Hello hello;
  hello.k = static_cast<std::uint16_t>(p.k);
  hello.n = static_cast<std::uint16_t>(p.n);
  hello.l = static_cast<std::uint8_t>(p.l);
  hello.key_length_bits = static_cast<std::uint32_t>(config_.key_length_bits);
  hello.session_id = session_id_;
  return {hello};
}

std::vector<Message> Session::step(const std::optional<Message>& incoming) {
  return incoming ? step(*incoming) : start();
}

std::vector<Message> Session::step(const Message& incoming) {
  if (finished()) return {};
  if (const auto* a = std::get_if<Abort>(&incoming)) {
    phase_ = phase::Aborted{a->reason, true};
    return {};
  }
  return config_.role == Role::kInitiator ? on_initiator(incoming) : on_responder(incoming);
}

std::vector<Message> Session::abort(AbortReason reason) {
  phase_ = phase::Aborted{reason, false};
  return {Abort{reason}};
}

Message Session::next_input(std::uint32_t iteration, std::uint32_t retry) {
  const auto& p = config_.params;
  pending_x_ = InputVector::random(p.k, p.n, *rng_);
  pending_out_ = machine_.evaluate(pending_x_);
  phase_ = phase::Syncing{iteration, retry};
  Input msg;
  msg.iteration = iteration;
  msg.retry = static_cast<std::uint8_t>(retry);
  msg.tau = static_cast<std::int8_t>(pending_out_.tau);
  msg.packed_x = pending_x_.pack();
  return msg;
}

std::vector<Message> Session::on_initiator(const Message& incoming) {
  if (std::holds_alternative<phase::Handshake>(phase_)) {
    const auto* ack = std::get_if<HelloAck>(&incoming);
    if (!started_ || ack == nullptr) return abort(AbortReason::kProtocolViolation);
    if (!ack->accepted) {
      phase_ = phase::Aborted{AbortReason::kParameterMismatch, true};
      return {};
    }
    return {next_input(0, 0)};
  }

  if (const auto* sync = std::get_if<phase::Syncing>(&phase_)) {
    const auto* out = std::get_if<Output>(&incoming);
    if (out == nullptr || out->iteration != sync->iteration || out->retry != sync->retry) {
      return abort(AbortReason::kProtocolViolation);
    }
    if (out->tau == pending_out_.tau) {
      machine_.hebbian_update(pending_x_, pending_out_);
      const std::uint32_t done = sync->iteration + 1;
      if (done % config_.digest_check_period == 0 || done >= config_.max_iterations) {
        phase_ = phase::Verifying{done};
        return {DigestCheck{done, weight_digest(machine_.weights())}};
      }
      return {next_input(done, 0)};
    }
    ++retries_total_;
    if (sync->retry >= config_.max_retries_per_iteration) {
      return abort(AbortReason::kRetryExhausted);
    }
    return {next_input(sync->iteration, sync->retry + 1)};
  }

  if (const auto* verify = std::get_if<phase::Verifying>(&phase_)) {
    const auto* ack = std::get_if<DigestAck>(&incoming);
    if (ack == nullptr) return abort(AbortReason::kProtocolViolation);
    if (ack->matched) {
      const std::uint32_t used = verify->iteration;
      phase_ = phase::Done{used};
      return {Done{used}};
    }
    if (verify->iteration >= config_.max_iterations) {
      return abort(AbortReason::kIterationBudget);
    }
    return {next_input(verify->iteration, 0)};
  }
  return abort(AbortReason::kProtocolViolation);
}

std::vector<Message> Session::on_responder(const Message& incoming) {
  if (std::holds_alternative<phase::Handshake>(phase_)) {
    const auto* hello = std::get_if<Hello>(&incoming);
    if (hello == nullptr) return abort(AbortReason::kProtocolViolation);
    const auto& p = config_.params;
    if (hello->k != p.k || hello->n != p.n || hello->l != p.l ||
        hello->key_length_bits != config_.key_length_bits) {
      return abort(AbortReason::kParameterMismatch);
    }
    session_id_ = hello->session_id;
    phase_ = phase::Syncing{0, 0};
    return {HelloAck{true}};
  }

  if (const auto* sync = std::get_if<phase::Syncing>(&phase_)) {
    if (const auto* in = std::get_if<Input>(&incoming)) {
      if (in->iteration != sync->iteration || in->retry != sync->retry ||
          sync->retry > config_.max_retries_per_iteration) {
        return abort(AbortReason::kProtocolViolation);
      }
      const auto& p = config_.params;
      if (in->packed_x.size() != (p.weight_count() + 7) / 8) {
        return abort(AbortReason::kProtocolViolation);
      }
      const auto x = InputVector::unpack(p.k, p.n, in->packed_x);
      const auto out = machine_.evaluate(x);
      Output reply{sync->iteration, in->retry, static_cast<std::int8_t>(out.tau)};
      if (out.tau == in->tau) {
        machine_.hebbian_update(x, out);
        phase_ = phase::Syncing{sync->iteration + 1, 0};
      } else {
        ++retries_total_;
        phase_ = phase::Syncing{sync->iteration, sync->retry + 1};
      }
      return {reply};
    }
    if (const auto* check = std::get_if<DigestCheck>(&incoming)) {
      if (check->iteration != sync->iteration || sync->retry != 0) {
        return abort(AbortReason::kProtocolViolation);
      }
      const bool matched = check->digest == weight_digest(machine_.weights());
      if (matched) phase_ = phase::Verifying{sync->iteration};
      return {DigestAck{matched}};
    }
    return abort(AbortReason::kProtocolViolation);
  }

  if (const auto* verify = std::get_if<phase::Verifying>(&phase_)) {
    const auto* done = std::get_if<Done>(&incoming);
    if (done == nullptr || done->iterations_used != verify->iteration) {
      return abort(AbortReason::kProtocolViolation);
    }
    phase_ = phase::Done{verify->iteration};
    return {};
  }
  return abort(AbortReason::kProtocolViolation);
}

SessionResult Session::result() const {
  const auto* done = std::get_if<phase::Done>(&phase_);
  if (done == nullptr) throw Error(ErrorCode::kProtocolViolation, "session has not completed");
  const int bound = config_.params.l;
  SessionResult out;
  out.iterations_used = done->iterations_used;
  out.retries_total = retries_total_;
  out.leakage_z = leakage(out.iterations_used, bound);
  out.final_key =
      apply_reduction(decode(machine_.weights(), config_.key_length_bits), out.leakage_z, bound);
  return out;
}

void drive_pair(Session& initiator, Session& responder, const MessageObserver& observer) {
  struct InFlight {
    Role sender;
    std::vector<std::uint8_t> frame;
  };
  std::deque<InFlight> queue;
  const auto post = [&](Role sender, const std::vector<Message>& messages) {
    for (const auto& m : messages) queue.push_back({sender, encode_frame(m)});
  };
  post(Role::kInitiator, initiator.start());
  post(Role::kResponder, responder.start());
  while (!queue.empty()) {
    auto item = std::move(queue.front());
    queue.pop_front();
    const Message msg = decode_frame(item.frame);
    if (observer) observer(item.sender, msg);
    if (item.sender == Role::kInitiator) {
      post(Role::kResponder, responder.step(msg));
    } else {
      post(Role::kInitiator, initiator.step(msg));
    }
  }
  if (!initiator.finished() || !responder.finished()) {
    throw Error(ErrorCode::kProtocolViolation, "in-memory session stalled before finishing");
  }
}

}  // namespace tpmr::protocol
