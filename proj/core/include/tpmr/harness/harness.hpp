#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tpmr/harness/stats.hpp"
#include "tpmr/key_codec.hpp"

namespace tpmr::harness {

/// One experimental condition: key length, weight bound, QBER and shape.
struct TrialConfig {
  std::size_t key_length_bits = 256;
  int l = 1;
  double qber_percent = 0.0;
  Structure structure;

  /// Stable identifier, e.g. "m256_L4_q3_N16_K4".
  std::string id() const;
  friend bool operator==(const TrialConfig&, const TrialConfig&) = default;
};

struct SweepSpec {
  std::size_t key_length_bits = 256;
  std::vector<int> l_values;
  std::vector<double> qber_percents;
  std::vector<Structure> structures;  // empty: every shape from enumerate_structures
  std::size_t trials = 400;
  std::uint32_t max_iterations = 1000;
  std::uint32_t max_retries = 10;
  std::uint32_t digest_check_period = 1;
  std::uint64_t base_seed = 1;
  unsigned threads = 0;  // 0: hardware concurrency, capped by TPM_RECONCILE_THREADS

  void validate() const;
  /// All configurations in (L, QBER, structure) order.
  std::vector<TrialConfig> expand() const;
};

enum class Outcome { kSuccess, kRetryExhausted, kBudgetExhausted };

std::string_view to_string(Outcome outcome) noexcept;

struct TrialRecord {
  std::string config_id;
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::kSuccess;
  std::optional<std::uint32_t> iterations_used;  // present iff success
  std::size_t retries_total = 0;
  std::chrono::nanoseconds wall_time{0};
};

struct ConfigResult {
  TrialConfig config;
  std::vector<TrialRecord> records;
  IterationStats stats;
};

/// One full reconciliation between two in-memory endpoints on a fresh key pair.
TrialRecord run_trial(const TrialConfig& config, const SweepSpec& limits, std::uint64_t seed);

IterationStats summarize(std::span<const TrialRecord> records);

/// Trial i of every configuration uses seed base_seed + i, so results do not
/// depend on the number of worker threads.
std::vector<ConfigResult> run_trials(const SweepSpec& sweep);

enum class TrendAxis { kK, kQber, kL };

struct TrendPoint {
  double axis_value = 0.0;
  double avg_recommended = 0.0;  // NaN when no configuration was usable
  std::size_t configs_used = 0;
  std::string label;
};

/// QBER and L axes average the recommendation over every usable structure
/// per axis value; the K axis reports each structure at the single L and
/// QBER in the sweep. Points are ordered by axis value.
std::vector<TrendPoint> trend_sweep(TrendAxis axis, const SweepSpec& sweep,
                                    std::vector<ConfigResult>* raw = nullptr);

/// Aggregates finished results along an axis, as trend_sweep does.
std::vector<TrendPoint> trend_points(TrendAxis axis, std::span<const ConfigResult> results);

/// Runs task(i) for i in [0, count) on a pool of `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task);

/// Resolves the worker count: requested (0 = hardware), capped by the
/// TPM_RECONCILE_THREADS environment variable when set.
unsigned worker_count(unsigned requested);

void write_stats_json(std::ostream& out, std::span<const ConfigResult> results);
void write_histogram_csv(std::ostream& out, std::span<const ConfigResult> results);
void write_trend_csv(std::ostream& out, std::span<const TrendPoint> points);

}  // namespace tpmr::harness
