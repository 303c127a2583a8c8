#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tpmr/key_codec.hpp"

namespace tpmr::cli {

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimulateKeysOptions {
  std::size_t length_bits = 0;
  double qber = 0.0;  // fraction
  std::uint64_t seed = 1;
  std::string out_a;
  std::string out_b;
};

struct SyncOptions {
  std::string role;
  std::string listen;
  std::string connect;
  std::string key_file;
  std::size_t key_bits = 0;  // 0: 8 bits per hex byte
  int k = 0;
  int n = 0;
  int l = 0;
  std::uint32_t max_iterations = 1000;
  std::uint32_t max_retries = 10;
  std::uint32_t digest_period = 1;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string port_file;
  int timeout_ms = 30'000;
};

struct ExperimentOptions {
  std::size_t key_bits = 256;
  std::vector<int> l_values;
  std::vector<double> qber_percents;
  std::string structures = "all";
  std::size_t trials = 400;
  std::uint64_t seed = 1;
  std::uint32_t max_iterations = 1000;
  std::uint32_t max_retries = 10;
  std::uint32_t digest_period = 1;
  unsigned threads = 0;
  std::string json_out;
  std::string csv_out;
  std::string trend;
  std::string trend_out;
};

struct RecommendOptions {
  std::size_t key_bits = 256;
  int l = 0;
  double qber_percent = 1.0;
  bool compute = false;
  std::size_t trials = 400;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct AttackOptions {
  std::size_t key_bits = 256;
  int k = 0;
  int n = 0;
  int l = 0;
  double qber_percent = 1.0;
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  std::uint32_t max_iterations = 1000;
  std::uint32_t max_retries = 10;
  unsigned threads = 0;
};

int cmd_simulate_keys(const SimulateKeysOptions& o, std::ostream& out, std::ostream& err);
int cmd_sync(const SyncOptions& o, std::ostream& out, std::ostream& err);
int cmd_experiment(const ExperimentOptions& o, std::ostream& out, std::ostream& err);
int cmd_recommend(const RecommendOptions& o, std::ostream& out, std::ostream& err);
int cmd_attack_sim(const AttackOptions& o, std::ostream& out, std::ostream& err);

/// "all" -> empty list; otherwise comma-separated NxK entries.
std::vector<Structure> parse_structures(const std::string& text);

/// Bundled recommendations for 256-bit keys; nullopt when not tabulated.
std::optional<std::uint32_t> precomputed_recommendation(std::size_t key_bits, int l, double qber_percent,
                                                        const Structure& s);

}  // namespace tpmr::cli
