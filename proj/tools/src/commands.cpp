#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "tpmr/error.hpp"
#include "tpmr/harness/eve.hpp"
#include "tpmr/harness/harness.hpp"
#include "tpmr/protocol/run_session.hpp"
#include "tpmr/protocol/transport.hpp"
#include "tpmr/qkd_sim.hpp"
#include "tpmr_cli/cli.hpp"

namespace tpmr::cli {

namespace {

using harness::ConfigResult;
using harness::SweepSpec;
using harness::TrialConfig;

void usage_error(const std::string& message) { throw Error(ErrorCode::kInvalidArgument, message); }

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  return f;
}

void finish(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) throw IoError("failed writing '" + path + "'");
}

/// Writes through `body` to `path`, or to `fallback` when path is empty or "-".
template <typename Body>
void emit(const std::string& path, std::ostream& fallback, Body&& body) {
  if (path.empty() || path == "-") {
    body(fallback);
    return;
  }
  auto f = open_out(path);
  body(f);
  finish(f, path);
}

KeyMaterial read_key_file(const std::string& path, std::size_t bits) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open key file '" + path + "'");
  std::vector<KeyMaterial> keys;
  try {
    keys = read_key_lines(f, bits);
  } catch (const Error& e) {
    throw IoError("malformed key file '" + path + "': " + e.what());
  }
  if (keys.empty()) throw IoError("key file '" + path + "' holds no key");
  return keys.front();
}

void check_percent(double q) {
  if (!(q >= 0.0 && q <= 50.0)) usage_error("QBER percent must lie in [0, 50]");
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

void report_config(std::ostream& err, const ConfigResult& r) {
  const auto& s = r.stats;
  err << r.config.id() << ": " << s.success_count << "/" << s.trial_count << " synchronized";
  if (s.success_count > 0) err << ", mean " << fixed(s.mean, 1) << ", std " << fixed(s.stddev, 1);
  if (s.recommended) {
    err << ", recommended " << *s.recommended;
  } else {
    err << ", too few successes for a recommendation";
  }
  err << '\n';
}

}  // namespace

std::vector<Structure> parse_structures(const std::string& text) {
  if (text == "all") return {};
  std::vector<Structure> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto x = item.find('x');
    Structure s;
    try {
      std::size_t used_n = 0;
      std::size_t used_k = 0;
      if (x == std::string::npos) throw std::invalid_argument("no x");
      s.n = std::stoi(item.substr(0, x), &used_n);
      s.k = std::stoi(item.substr(x + 1), &used_k);
      if (used_n != x || used_k != item.size() - x - 1 || s.n < 1 || s.k < 1) throw std::invalid_argument("bad");
    } catch (const std::exception&) {
      usage_error("structure '" + item + "' is not of the form NxK");
    }
    out.push_back(s);
  }
  if (out.empty()) usage_error("empty structure list");
  return out;
}

int cmd_simulate_keys(const SimulateKeysOptions& o, std::ostream& out, std::ostream& err) {
  if (o.length_bits == 0) usage_error("--length-bits must be positive");
  if (!(o.qber >= 0.0 && o.qber <= 0.5)) usage_error("--qber is a fraction in [0, 0.5]");
  const auto pair = generate_pair(o.length_bits, o.qber, o.seed);
  emit(o.out_a, out, [&](std::ostream& s) { write_key_line(s, pair.key_a); });
  emit(o.out_b, out, [&](std::ostream& s) { write_key_line(s, pair.key_b); });
  err << "wrote " << o.length_bits << "-bit key pair with " << pair.true_error_count << " differing bits\n";
  out << "true_error_count=" << pair.true_error_count << '\n';
  return kExitOk;
}

int cmd_sync(const SyncOptions& o, std::ostream& out, std::ostream& err) {
  using namespace protocol;
  SessionConfig config;
  if (o.role == "initiator") {
    config.role = Role::kInitiator;
  } else if (o.role == "responder") {
    config.role = Role::kResponder;
  } else {
    usage_error("--role must be initiator or responder");
  }
  if (o.listen.empty() == o.connect.empty()) usage_error("give exactly one of --listen and --connect");
  if (o.timeout_ms <= 0) usage_error("--timeout-ms must be positive");
  const auto key = read_key_file(o.key_file, o.key_bits);
  config.params = {o.k, o.n, o.l};
  config.key_length_bits = key.length_bits();
  config.max_iterations = o.max_iterations;
  config.max_retries_per_iteration = o.max_retries;
  config.digest_check_period = o.digest_period;
  config.rng_seed = o.seed;
  config.validate();

  const std::chrono::milliseconds timeout(o.timeout_ms);
  std::unique_ptr<ByteStream> stream;
  if (!o.listen.empty()) {
    const auto [host, port] = parse_endpoint(o.listen);
    TcpListener listener(host, port);
    err << "listening on " << host << ":" << listener.port() << '\n';
    if (!o.port_file.empty()) {
      auto f = open_out(o.port_file + ".tmp");
      f << listener.port() << '\n';
      finish(f, o.port_file + ".tmp");
      f.close();
      if (std::rename((o.port_file + ".tmp").c_str(), o.port_file.c_str()) != 0) {
        throw IoError("cannot write port file '" + o.port_file + "'");
      }
    }
    stream = std::make_unique<TcpStream>(listener.accept(timeout));
  } else {
    const auto [host, port] = parse_endpoint(o.connect);
    stream = std::make_unique<TcpStream>(TcpStream::connect(host, port, timeout));
  }

  SessionResult result;
  try {
    result = run_session(key, config, *stream);
  } catch (const SessionAborted& e) {
    err << "session aborted: " << to_string(e.reason()) << (e.by_peer() ? " (by peer)" : "") << '\n';
    return kExitDomain;
  }
  emit(o.out, out, [&](std::ostream& s) { write_key_line(s, result.final_key); });
  err << "iterations_used=" << result.iterations_used << " retries_total=" << result.retries_total
      << " leakage_z=" << fixed(result.leakage_z, 6) << " final_key_bits=" << result.final_key.length_bits()
      << '\n';
  return kExitOk;
}

int cmd_experiment(const ExperimentOptions& o, std::ostream& out, std::ostream& err) {
  SweepSpec sweep;
  sweep.key_length_bits = o.key_bits;
  sweep.l_values = o.l_values;
  sweep.qber_percents = o.qber_percents;
  sweep.structures = parse_structures(o.structures);
  sweep.trials = o.trials;
  sweep.max_iterations = o.max_iterations;
  sweep.max_retries = o.max_retries;
  sweep.digest_check_period = o.digest_period;
  sweep.base_seed = o.seed;
  sweep.threads = o.threads;
  if (o.key_bits == 0) usage_error("--key-bits must be positive");
  for (const double q : o.qber_percents) check_percent(q);
  if (!o.trend_out.empty() && o.trend.empty()) usage_error("--trend-out needs --trend");
  sweep.validate();

  std::vector<ConfigResult> results;
  std::vector<harness::TrendPoint> points;
  if (o.trend.empty()) {
    results = harness::run_trials(sweep);
  } else {
    harness::TrendAxis axis{};
    if (o.trend == "K") {
      axis = harness::TrendAxis::kK;
    } else if (o.trend == "qber") {
      axis = harness::TrendAxis::kQber;
    } else if (o.trend == "L") {
      axis = harness::TrendAxis::kL;
    } else {
      usage_error("--trend must be K, qber or L");
    }
    points = harness::trend_sweep(axis, sweep, &results);
  }

  bool all_usable = true;
  for (const auto& r : results) {
    report_config(err, r);
    all_usable = all_usable && r.stats.usable();
  }
  if (o.trend.empty() || !o.json_out.empty()) {
    emit(o.json_out, out, [&](std::ostream& s) { harness::write_stats_json(s, results); });
  }
  if (!o.csv_out.empty()) {
    emit(o.csv_out, out, [&](std::ostream& s) { harness::write_histogram_csv(s, results); });
  }
  if (!o.trend.empty()) {
    emit(o.trend_out, out, [&](std::ostream& s) { harness::write_trend_csv(s, points); });
    bool points_ok = true;
    for (const auto& p : points) points_ok = points_ok && p.configs_used > 0;
    if (!points_ok) {
      err << "error: some trend points have no usable configuration (too few successful trials)\n";
      return kExitDomain;
    }
    return kExitOk;
  }
  if (!all_usable) {
    err << "error: recommendation refused for configurations with fewer than " << harness::kMinSamples
        << " successful trials\n";
    return kExitDomain;
  }
  return kExitOk;
}

int cmd_recommend(const RecommendOptions& o, std::ostream& out, std::ostream& err) {
  if (o.key_bits == 0) usage_error("--key-bits must be positive");
  if (o.l < 1 || o.l > kMaxWeightBound) usage_error("-L must lie in [1, 100]");
  check_percent(o.qber_percent);
  const auto structures = enumerate_structures(o.key_bits, o.l);

  std::vector<std::optional<std::uint64_t>> values(structures.size());
  const char* source = "table";
  if (o.compute) {
    SweepSpec sweep;
    sweep.key_length_bits = o.key_bits;
    sweep.l_values = {o.l};
    sweep.qber_percents = {o.qber_percent};
    sweep.structures = structures;
    sweep.trials = o.trials;
    sweep.base_seed = o.seed;
    sweep.threads = o.threads;
    const auto results = harness::run_trials(sweep);
    for (std::size_t i = 0; i < results.size(); ++i) values[i] = results[i].stats.recommended;
    source = "computed";
  } else {
    for (std::size_t i = 0; i < structures.size(); ++i) {
      if (auto v = precomputed_recommendation(o.key_bits, o.l, o.qber_percent, structures[i])) values[i] = *v;
    }
  }

  out << "N,K,recommended,source\n";
  bool any = false;
  for (std::size_t i = 0; i < structures.size(); ++i) {
    const auto& s = structures[i];
    out << s.n << ',' << s.k << ',';
    if (values[i]) {
      out << *values[i] << ',' << source;
      any = true;
    } else {
      out << "n/a,-";
    }
    out << '\n';
    if (s.k == 1) {
      err << "warning: " << s.n << "x1 has K=1; a single hidden neuron gives little protection against a passive "
          << "attacker\n";
    }
  }
  if (!any) {
    if (o.compute) {
      err << "error: no structure reached " << harness::kMinSamples << " successful trials\n";
    } else {
      err << "error: " << o.key_bits << "-bit keys at L=" << o.l << ", QBER " << o.qber_percent
          << "% are not precomputed; rerun with --compute\n";
    }
    return kExitDomain;
  }
  return kExitOk;
}

int cmd_attack_sim(const AttackOptions& o, std::ostream& out, std::ostream& err) {
  if (o.trials == 0) usage_error("--trials must be positive");
  check_percent(o.qber_percent);
  SweepSpec limits;
  limits.key_length_bits = o.key_bits;
  limits.l_values = {o.l};
  limits.qber_percents = {o.qber_percent};
  limits.structures = {{o.n, o.k}};
  limits.max_iterations = o.max_iterations;
  limits.max_retries = o.max_retries;
  limits.threads = o.threads;
  const auto configs = limits.expand();
  const TrialConfig& config = configs.front();

  const auto s = harness::run_eve_trials(config, limits, o.trials, o.seed);
  err << config.id() << ": Alice and Bob synchronized in " << s.ab_successes << "/" << s.trials
      << " trials; Eve fully synchronized in " << s.eve_converged << '\n';
  out << "config_id=" << config.id() << '\n'
      << "trials=" << s.trials << '\n'
      << "ab_successes=" << s.ab_successes << '\n'
      << "mean_ab_iterations=" << fixed(s.mean_ab_iterations, 4) << '\n'
      << "eve_converged=" << s.eve_converged << '\n'
      << "eve_convergence_rate=" << fixed(s.eve_convergence_rate(), 6) << '\n'
      << "mean_match_fraction=" << fixed(s.mean_match_fraction, 6) << '\n'
      << "random_baseline_fraction=" << fixed(1.0 / (2.0 * o.l + 1.0), 6) << '\n';
  if (s.ab_successes == 0) {
    err << "error: no trial synchronized Alice and Bob\n";
    return kExitDomain;
  }
  return kExitOk;
}

}  // namespace tpmr::cli
