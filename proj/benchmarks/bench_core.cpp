#include <benchmark/benchmark.h>

#include "tpmr/key_codec.hpp"
#include "tpmr/protocol/session.hpp"
#include "tpmr/qkd_sim.hpp"
#include "tpmr/rng.hpp"
#include "tpmr/tpm.hpp"

using namespace tpmr;

static void BM_Evaluate(benchmark::State& state) {
  const TpmParams p{static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 4};
  SplitMix64 rng(1);
  const TreeParityMachine m(WeightMatrix::random(p, rng));
  const auto x = InputVector::random(p.k, p.n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(m.evaluate(x));
}
BENCHMARK(BM_Evaluate)->Args({4, 16})->Args({2, 43})->Args({43, 2});

static void BM_EvaluateAndUpdate(benchmark::State& state) {
  const TpmParams p{static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 4};
  SplitMix64 rng(2);
  TreeParityMachine m(WeightMatrix::random(p, rng));
  const auto x = InputVector::random(p.k, p.n, rng);
  for (auto _ : state) {
    const auto out = m.evaluate(x);
    m.hebbian_update(x, out);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_EvaluateAndUpdate)->Args({4, 16})->Args({2, 43});

static void BM_Encode(benchmark::State& state) {
  const auto key = generate_pair(256, 0.0, 3).key_a;
  const TpmParams p{4, 16, 4};
  for (auto _ : state) benchmark::DoNotOptimize(encode(key, p));
}
BENCHMARK(BM_Encode);

static void BM_InMemorySession(benchmark::State& state) {
  using namespace protocol;
  const auto pair = generate_pair(256, 0.03, 4);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    SessionConfig c;
    c.params = {4, 16, 4};
    c.key_length_bits = 256;
    c.rng_seed = ++seed;
    Session alice(pair.key_a, c);
    c.role = Role::kResponder;
    c.rng_seed.reset();
    Session bob(pair.key_b, c);
    drive_pair(alice, bob);
    benchmark::DoNotOptimize(alice.phase());
  }
}
BENCHMARK(BM_InMemorySession)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
