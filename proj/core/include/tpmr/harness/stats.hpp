#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace tpmr::harness {

/// Below this many successful trials a configuration gets no recommendation.
inline constexpr std::size_t kMinSamples = 30;

struct Histogram {
  std::uint32_t bucket_width = 1;
  std::uint32_t first_bucket_low = 0;
  std::vector<std::size_t> counts;

  std::uint32_t bucket_low(std::size_t i) const {
    return first_bucket_low + static_cast<std::uint32_t>(i) * bucket_width;
  }
};

struct Percentile {
  int p = 0;
  double value = 0.0;
};

inline constexpr int kReportedPercentiles[] = {50, 85, 90, 95};

/// Distribution of iterations-to-synchronization for one configuration.
/// Moments are over successful trials only; stddev is the population one.
struct IterationStats {
  std::size_t trial_count = 0;
  std::size_t success_count = 0;
  std::size_t retry_exhausted_count = 0;
  std::size_t budget_exhausted_count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  double variance = 0.0;
  double median = 0.0;
  std::vector<Percentile> percentiles;
  Histogram histogram;
  std::optional<std::uint64_t> recommended;  // ceil(mean + stddev), if usable

  bool usable() const noexcept { return recommended.has_value(); }
  double percentile(int p) const;
  double failure_rate() const noexcept {
    return trial_count == 0 ? 0.0
                            : 1.0 - static_cast<double>(success_count) / static_cast<double>(trial_count);
  }
};

/// Linear interpolation between closest ranks (R type 7). `sorted` must be
/// ascending and non-empty; p in [0, 100].
double percentile_of_sorted(std::span<const double> sorted, double p);

/// Bucket width 0 picks one automatically (about 20 buckets).
Histogram make_histogram(std::span<const std::uint32_t> samples, std::uint32_t bucket_width = 0);

/// `successes` holds iterations_used of every successful trial.
IterationStats summarize(std::span<const std::uint32_t> successes, std::size_t retry_exhausted,
                         std::size_t budget_exhausted, std::uint32_t bucket_width = 0);

/// ceil(mean + std). Throws Error(kTooFewSamples) below kMinSamples successes.
std::uint64_t recommend(const IterationStats& stats);

struct SkewnessReport {
  bool mean_gt_median = false;
};

/// Throws Error(kTooFewSamples) below kMinSamples successes.
SkewnessReport skewness_check(const IterationStats& stats);

}  // namespace tpmr::harness
