#include "tpmr/harness/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tpmr/error.hpp"

namespace tpmr::harness {

namespace {

void require_samples(const IterationStats& stats) {
  if (stats.success_count < kMinSamples) {
    throw Error(ErrorCode::kTooFewSamples,
                std::to_string(stats.success_count) + " successful trials; at least " +
                    std::to_string(kMinSamples) + " are needed");
  }
}

}  // namespace

double IterationStats::percentile(int p) const {
  for (const auto& entry : percentiles) {
    if (entry.p == p) return entry.value;
  }
  throw Error(ErrorCode::kInvalidArgument, "percentile " + std::to_string(p) + " not reported");
}

double percentile_of_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::kTooFewSamples, "percentile of an empty sample");
  if (p < 0.0 || p > 100.0) throw Error(ErrorCode::kInvalidArgument, "percentile outside [0, 100]");
  const double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

Histogram make_histogram(std::span<const std::uint32_t> samples, std::uint32_t bucket_width) {
  Histogram h;
  if (samples.empty()) return h;
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const std::uint32_t lo = *lo_it;
  const std::uint32_t hi = *hi_it;
  if (bucket_width == 0) bucket_width = std::max<std::uint32_t>(1, (hi - lo + 20) / 20);
  h.bucket_width = bucket_width;
  h.first_bucket_low = lo - lo % bucket_width;
  h.counts.assign((hi - h.first_bucket_low) / bucket_width + 1, 0);
  for (const auto s : samples) ++h.counts[(s - h.first_bucket_low) / bucket_width];
  return h;
}

IterationStats summarize(std::span<const std::uint32_t> successes, std::size_t retry_exhausted,
                         std::size_t budget_exhausted, std::uint32_t bucket_width) {
  IterationStats s;
  s.success_count = successes.size();
  s.retry_exhausted_count = retry_exhausted;
  s.budget_exhausted_count = budget_exhausted;
  s.trial_count = s.success_count + retry_exhausted + budget_exhausted;
  if (successes.empty()) return s;

  std::vector<double> sorted(successes.begin(), successes.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (const double v : sorted) sum += v;
  s.mean = sum / static_cast<double>(sorted.size());
  double sq = 0.0;
  for (const double v : sorted) sq += (v - s.mean) * (v - s.mean);
  s.variance = sq / static_cast<double>(sorted.size());
  s.stddev = std::sqrt(s.variance);
  s.median = percentile_of_sorted(sorted, 50.0);
  for (const int p : kReportedPercentiles) {
    s.percentiles.push_back({p, percentile_of_sorted(sorted, p)});
  }
  s.histogram = make_histogram(successes, bucket_width);
  if (s.success_count >= kMinSamples) {
    s.recommended = static_cast<std::uint64_t>(std::ceil(s.mean + s.stddev));
  }
  return s;
}

std::uint64_t recommend(const IterationStats& stats) {
  require_samples(stats);
  return static_cast<std::uint64_t>(std::ceil(stats.mean + stats.stddev));
}

SkewnessReport skewness_check(const IterationStats& stats) {
  require_samples(stats);
  return {stats.mean > stats.median};
}

}  // namespace tpmr::harness
