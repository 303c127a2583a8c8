#include "tpmr/harness/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tpmr/error.hpp"
#include "tpmr/protocol/session.hpp"
#include "tpmr/qkd_sim.hpp"
#include "tpmr/rng.hpp"

namespace tpmr::harness {

namespace {

std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

std::string TrialConfig::id() const {
  return "m" + std::to_string(key_length_bits) + "_L" + std::to_string(l) + "_q" +
         format_number(qber_percent) + "_N" + std::to_string(structure.n) + "_K" +
         std::to_string(structure.k);
}

std::string_view to_string(Outcome outcome) noexcept {
  switch (outcome) {
    case Outcome::kSuccess: return "success";
    case Outcome::kRetryExhausted: return "retry_exhausted";
    case Outcome::kBudgetExhausted: return "budget_exhausted";
  }
  return "unknown";
}

void SweepSpec::validate() const {
  if (l_values.empty()) throw Error(ErrorCode::kInvalidArgument, "sweep needs at least one L value");
  if (qber_percents.empty()) throw Error(ErrorCode::kInvalidArgument, "sweep needs at least one QBER value");
  if (trials == 0) throw Error(ErrorCode::kInvalidArgument, "sweep needs at least one trial");
  if (max_iterations == 0 || max_retries == 0 || max_retries > 255 || digest_check_period == 0) {
    throw Error(ErrorCode::kInvalidArgument, "iteration, retry and digest limits must be positive");
  }
  for (const double q : qber_percents) {
    if (!(q >= 0.0 && q <= 50.0)) throw Error(ErrorCode::kInvalidArgument, "QBER percent must lie in [0, 50]");
  }
  for (const int l : l_values) {
    if (l < 1 || l > kMaxWeightBound) throw Error(ErrorCode::kInvalidArgument, "L must lie in [1, 100]");
  }
}

std::vector<TrialConfig> SweepSpec::expand() const {
  validate();
  std::vector<TrialConfig> out;
  for (const int l : l_values) {
    const auto shapes = structures.empty() ? enumerate_structures(key_length_bits, l) : structures;
    const auto needed = weight_count(key_length_bits, l);
    for (const double q : qber_percents) {
      for (const auto& s : shapes) {
        if (static_cast<std::size_t>(s.n) * static_cast<std::size_t>(s.k) != needed) {
          throw Error(ErrorCode::kInvalidArgument,
                      "structure " + std::to_string(s.n) + "x" + std::to_string(s.k) +
                          " does not fit a " + std::to_string(key_length_bits) + "-bit key at L=" +
                          std::to_string(l) + " (needs N*K = " + std::to_string(needed) + ")");
        }
        out.push_back({key_length_bits, l, q, s});
      }
    }
  }
  return out;
}

TrialRecord run_trial(const TrialConfig& config, const SweepSpec& limits, std::uint64_t seed) {
  using namespace protocol;
  const auto started = std::chrono::steady_clock::now();
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
  drive_pair(alice, bob);

  TrialRecord record;
  record.config_id = config.id();
  record.seed = seed;
  record.retries_total = alice.retries_total();
  if (const auto* done = std::get_if<phase::Done>(&alice.phase())) {
    record.outcome = Outcome::kSuccess;
    record.iterations_used = done->iterations_used;
  } else {
    const auto reason = alice.aborted()->reason;
    if (reason == AbortReason::kRetryExhausted) {
      record.outcome = Outcome::kRetryExhausted;
    } else if (reason == AbortReason::kIterationBudget) {
      record.outcome = Outcome::kBudgetExhausted;
    } else {
      throw Error(ErrorCode::kProtocolViolation,
                  "in-memory trial aborted unexpectedly: " + std::string(to_string(reason)));
    }
  }
  record.wall_time = std::chrono::steady_clock::now() - started;
  return record;
}

IterationStats summarize(std::span<const TrialRecord> records) {
  std::vector<std::uint32_t> successes;
  std::size_t retry = 0;
  std::size_t budget = 0;
  for (const auto& r : records) {
    switch (r.outcome) {
      case Outcome::kSuccess: successes.push_back(*r.iterations_used); break;
      case Outcome::kRetryExhausted: ++retry; break;
      case Outcome::kBudgetExhausted: ++budget; break;
    }
  }
  return summarize(successes, retry, budget);
}

unsigned worker_count(unsigned requested) {
  unsigned n = requested != 0 ? requested : std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TPM_RECONCILE_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(threads), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            task(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<ConfigResult> run_trials(const SweepSpec& sweep) {
  const auto configs = sweep.expand();
  std::vector<ConfigResult> results(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    results[c].config = configs[c];
    results[c].records.resize(sweep.trials);
  }
  parallel_for(configs.size() * sweep.trials, sweep.threads, [&](std::size_t task) {
    const std::size_t c = task / sweep.trials;
    const std::size_t t = task % sweep.trials;
    results[c].records[t] = run_trial(configs[c], sweep, sweep.base_seed + t);
  });
  for (auto& r : results) r.stats = summarize(r.records);
  return results;
}

std::vector<TrendPoint> trend_points(TrendAxis axis, std::span<const ConfigResult> results) {
  std::vector<TrendPoint> points;
  if (axis == TrendAxis::kK) {
    for (const auto& r : results) {
      TrendPoint p;
      p.axis_value = r.config.structure.k;
      p.label = std::to_string(r.config.structure.n) + "x" + std::to_string(r.config.structure.k);
      if (r.stats.usable()) {
        p.avg_recommended = static_cast<double>(*r.stats.recommended);
        p.configs_used = 1;
      } else {
        p.avg_recommended = std::numeric_limits<double>::quiet_NaN();
      }
      points.push_back(std::move(p));
    }
    std::stable_sort(points.begin(), points.end(),
                     [](const TrendPoint& a, const TrendPoint& b) { return a.axis_value < b.axis_value; });
    return points;
  }
  std::map<double, std::pair<double, std::size_t>> sums;
  for (const auto& r : results) {
    const double key = axis == TrendAxis::kQber ? r.config.qber_percent : r.config.l;
    auto& [sum, used] = sums[key];
    if (r.stats.usable()) {
      sum += static_cast<double>(*r.stats.recommended);
      ++used;
    }
  }
  for (const auto& [value, acc] : sums) {
    TrendPoint p;
    p.axis_value = value;
    p.configs_used = acc.second;
    p.avg_recommended = acc.second == 0 ? std::numeric_limits<double>::quiet_NaN()
                                        : acc.first / static_cast<double>(acc.second);
    p.label = (axis == TrendAxis::kQber ? "qber=" : "L=") + format_number(value);
    points.push_back(std::move(p));
  }
  return points;
}

std::vector<TrendPoint> trend_sweep(TrendAxis axis, const SweepSpec& sweep,
                                    std::vector<ConfigResult>* raw) {
  sweep.validate();
  if (axis == TrendAxis::kK && (sweep.l_values.size() != 1 || sweep.qber_percents.size() != 1)) {
    throw Error(ErrorCode::kInvalidArgument, "the K axis needs exactly one L and one QBER value");
  }
  if (axis == TrendAxis::kQber && sweep.qber_percents.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "the QBER axis needs at least two QBER values");
  }
  if (axis == TrendAxis::kL && sweep.l_values.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "the L axis needs at least two L values");
  }
  if (axis == TrendAxis::kK && sweep.expand().size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "the K axis needs at least two structures");
  }
  auto results = run_trials(sweep);
  auto points = trend_points(axis, results);
  if (raw != nullptr) *raw = std::move(results);
  return points;
}

void write_stats_json(std::ostream& out, std::span<const ConfigResult> results) {
  using nlohmann::ordered_json;
  ordered_json doc = ordered_json::array();
  for (const auto& r : results) {
    const auto& s = r.stats;
    ordered_json o;
    o["config_id"] = r.config.id();
    o["key_length_bits"] = r.config.key_length_bits;
    o["L"] = r.config.l;
    o["qber_percent"] = r.config.qber_percent;
    o["N"] = r.config.structure.n;
    o["K"] = r.config.structure.k;
    o["trial_count"] = s.trial_count;
    o["success_count"] = s.success_count;
    o["retry_exhausted_count"] = s.retry_exhausted_count;
    o["budget_exhausted_count"] = s.budget_exhausted_count;
    o["failure_rate"] = s.failure_rate();
    o["mean"] = s.mean;
    o["std"] = s.stddev;
    o["median"] = s.median;
    o["variance"] = s.variance;
    ordered_json pct = ordered_json::object();
    for (const auto& p : s.percentiles) pct[std::to_string(p.p)] = p.value;
    o["percentiles"] = pct;
    o["histogram"] = {{"bucket_width", s.histogram.bucket_width},
                      {"first_bucket_low", s.histogram.first_bucket_low},
                      {"counts", s.histogram.counts}};
    o["usable"] = s.usable();
    o["recommended"] = s.recommended ? ordered_json(*s.recommended) : ordered_json(nullptr);
    o["mean_gt_median"] = s.usable() ? ordered_json(s.mean > s.median) : ordered_json(nullptr);
    doc.push_back(std::move(o));
  }
  out << doc.dump(2) << '\n';
}

void write_histogram_csv(std::ostream& out, std::span<const ConfigResult> results) {
  out << "config_id,bucket_low,count\n";
  for (const auto& r : results) {
    const auto& h = r.stats.histogram;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      out << r.config.id() << ',' << h.bucket_low(i) << ',' << h.counts[i] << '\n';
    }
  }
}

void write_trend_csv(std::ostream& out, std::span<const TrendPoint> points) {
  out << "axis_value,avg_recommended,configs_used,label\n";
  for (const auto& p : points) {
    out << format_number(p.axis_value) << ',';
    if (std::isnan(p.avg_recommended)) {
      out << "nan";
    } else {
      out << format_number(p.avg_recommended);
    }
    out << ',' << p.configs_used << ',' << p.label << '\n';
  }
}

}  // namespace tpmr::harness
