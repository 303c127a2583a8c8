#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "tpmr/harness/harness.hpp"

namespace tpmr::harness {

enum class EveInit { kRandom, kCopyInitiator };

struct EveOutcome {
  std::uint32_t ab_converged_at = 0;
  double eve_match_fraction = 0.0;  // share of Eve's weights equal to Alice's
  bool eve_converged = false;
};

/// A passive attacker with her own machine watches every INPUT/OUTPUT pair
/// and, whenever the public taus agree, trains on x with her own output.
/// Returns nullopt when Alice and Bob fail to synchronize.
std::optional<EveOutcome> eve_trial(const TrialConfig& config, const SweepSpec& limits,
                                    std::uint64_t seed, EveInit init = EveInit::kRandom);

struct EveSummary {
  std::size_t trials = 0;
  std::size_t ab_successes = 0;
  std::size_t eve_converged = 0;
  double mean_match_fraction = 0.0;
  double mean_ab_iterations = 0.0;

  double eve_convergence_rate() const noexcept {
    return ab_successes == 0 ? 0.0
                             : static_cast<double>(eve_converged) / static_cast<double>(ab_successes);
  }
};

EveSummary run_eve_trials(const TrialConfig& config, const SweepSpec& limits, std::size_t trials,
                          std::uint64_t base_seed);

}  // namespace tpmr::harness
