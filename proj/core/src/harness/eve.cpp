#include "tpmr/harness/eve.hpp"

#include <vector>

#include "tpmr/protocol/session.hpp"
#include "tpmr/qkd_sim.hpp"
#include "tpmr/rng.hpp"

namespace tpmr::harness {

std::optional<EveOutcome> eve_trial(const TrialConfig& config, const SweepSpec& limits,
                                    std::uint64_t seed, EveInit init) {
  using namespace protocol;
  const auto pair = generate_pair(config.key_length_bits, config.qber_percent / 100.0, derive_seed(seed, 1));

  SessionConfig sc;
  sc.params = {config.structure.k, config.structure.n, config.l};
  sc.key_length_bits = config.key_length_bits;
  sc.max_iterations = limits.max_iterations;
  sc.max_retries_per_iteration = limits.max_retries;
  sc.digest_check_period = limits.digest_check_period;
  sc.rng_seed = derive_seed(seed, 2);
  sc.role = Role::kInitiator;
  Session alice(pair.key_a, sc);
  sc.role = Role::kResponder;
  sc.rng_seed.reset();
  Session bob(pair.key_b, sc);

  TreeParityMachine eve;
  if (init == EveInit::kCopyInitiator) {
    eve = alice.machine();
  } else {
    SplitMix64 rng(derive_seed(seed, 3));
    eve = TreeParityMachine(WeightMatrix::random(sc.params, rng));
  }

  // Eve sees x and tau_A in INPUT, then tau_B in the matching OUTPUT.
  InputVector last_x;
  int last_tau_a = 0;
  drive_pair(alice, bob, [&](Role sender, const Message& m) {
    if (sender == Role::kInitiator) {
      if (const auto* in = std::get_if<Input>(&m)) {
        last_x = InputVector::unpack(sc.params.k, sc.params.n, in->packed_x);
        last_tau_a = in->tau;
      }
    } else if (const auto* out = std::get_if<Output>(&m)) {
      if (out->tau == last_tau_a) eve.hebbian_update(last_x, eve.evaluate(last_x));
    }
  });

  const auto* done = std::get_if<phase::Done>(&alice.phase());
  if (done == nullptr) return std::nullopt;
  const auto agreement = weight_distance(eve, alice.machine());
  return EveOutcome{done->iterations_used, agreement.fraction(), agreement.synchronized()};
}

EveSummary run_eve_trials(const TrialConfig& config, const SweepSpec& limits, std::size_t trials,
                          std::uint64_t base_seed) {
  std::vector<std::optional<EveOutcome>> outcomes(trials);
  parallel_for(trials, limits.threads, [&](std::size_t i) {
    outcomes[i] = eve_trial(config, limits, base_seed + i);
  });
  EveSummary s;
  s.trials = trials;
  double match_sum = 0.0;
  double iter_sum = 0.0;
  for (const auto& o : outcomes) {
    if (!o) continue;
    ++s.ab_successes;
    if (o->eve_converged) ++s.eve_converged;
    match_sum += o->eve_match_fraction;
    iter_sum += o->ab_converged_at;
  }
  if (s.ab_successes > 0) {
    s.mean_match_fraction = match_sum / static_cast<double>(s.ab_successes);
    s.mean_ab_iterations = iter_sum / static_cast<double>(s.ab_successes);
  }
  return s;
}

}  // namespace tpmr::harness
