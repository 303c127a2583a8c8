#include <doctest.h>

#include <cmath>

#include "tpmr/error.hpp"
#include "tpmr/qkd_sim.hpp"
#include "tpmr/rng.hpp"

using namespace tpmr;

TEST_CASE("zero QBER yields identical keys") {
  const auto pair = generate_pair(256, 0.0, 1);
  CHECK(pair.key_a == pair.key_b);
  CHECK(pair.true_error_count == 0);
}

TEST_CASE("3% of 256 bits is exactly 8 flips") {
  CHECK(error_count_for(256, 0.03) == 8);
  const auto pair = generate_pair(256, 0.03, 99);
  CHECK(pair.true_error_count == 8);
  CHECK(hamming_distance(pair.key_a, pair.key_b) == 8);
}

TEST_CASE("rounding is half away from zero") {
  CHECK(error_count_for(5, 0.5) == 3);  // exactly 2.5
  CHECK(error_count_for(200, 0.0125) == 3);  // 2.5 -> 3
  CHECK(error_count_for(128, 0.01) == 1);
  CHECK(error_count_for(128, 0.02) == 3);
}

TEST_CASE("generation is deterministic in the seed") {
  const auto a = generate_pair(300, 0.05, 1234);
  const auto b = generate_pair(300, 0.05, 1234);
  const auto c = generate_pair(300, 0.05, 1235);
  CHECK(a.key_a == b.key_a);
  CHECK(a.key_b == b.key_b);
  CHECK(!(a.key_a == c.key_a));
}

TEST_CASE("generation rejects bad arguments") {
  CHECK_THROWS_AS(generate_pair(0, 0.01, 1), Error);
  CHECK_THROWS_AS(generate_pair(10, 0.6, 1), Error);
  CHECK_THROWS_AS(generate_pair(10, -0.1, 1), Error);
  CHECK_NOTHROW(generate_pair(10, 0.5, 1));
}

TEST_CASE("property: exact error count across lengths and rates") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t length = 1 + rng.below(800);
    const double qber = static_cast<double>(rng.below(501)) / 1000.0;
    const auto pair = generate_pair(length, qber, rng());
    REQUIRE(hamming_distance(pair.key_a, pair.key_b) == error_count_for(length, qber));
    REQUIRE(pair.true_error_count == error_count_for(length, qber));
  }
}

TEST_CASE("hamming distance") {
  const auto a = KeyMaterial::from_bit_string("10110010");
  const auto b = KeyMaterial::from_bit_string("01001101");
  CHECK(hamming_distance(a, a) == 0);
  CHECK(hamming_distance(a, b) == 8);
  CHECK_THROWS_AS(hamming_distance(a, KeyMaterial(9)), Error);

  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto pair = generate_pair(101, 0.2, seed);
    std::size_t naive = 0;
    for (std::size_t i = 0; i < 101; ++i) naive += pair.key_a.bit(i) != pair.key_b.bit(i) ? 1 : 0;
    CHECK(hamming_distance(pair.key_a, pair.key_b) == naive);
  }
}

TEST_CASE("estimate on identical keys") {
  const auto pair = generate_pair(200, 0.0, 5);
  const auto est = estimate_qber(pair.key_a, pair.key_b, 0.25, 6);
  CHECK(est.estimate == 0.0);
  CHECK(est.sample_size == 50);
  CHECK(est.remaining_a.length_bits() == 150);
  CHECK(est.remaining_a == est.remaining_b);
}

TEST_CASE("estimate rejects empty or total samples") {
  const auto pair = generate_pair(10, 0.1, 5);
  CHECK_THROWS_AS(estimate_qber(pair.key_a, pair.key_b, 0.01, 1), Error);
  CHECK_THROWS_AS(estimate_qber(pair.key_a, pair.key_b, 0.99, 1), Error);
  CHECK_THROWS_AS(estimate_qber(pair.key_a, pair.key_b, 0.0, 1), Error);
  CHECK_THROWS_AS(estimate_qber(pair.key_a, pair.key_b, 1.0, 1), Error);
  CHECK_THROWS_AS(estimate_qber(pair.key_a, KeyMaterial(11), 0.5, 1), Error);
}

TEST_CASE("near-total sample recovers the true rate") {
  const auto pair = generate_pair(1000, 0.05, 21);
  const auto est = estimate_qber(pair.key_a, pair.key_b, 0.999, 22);
  CHECK(est.sample_size == 999);
  CHECK(std::abs(est.estimate - 0.05) <= 1.0 / 999.0 + 1e-12);
}

TEST_CASE("property: disclosed bits never survive") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto pair = generate_pair(257, 0.08, seed);
    const auto est = estimate_qber(pair.key_a, pair.key_b, 0.3, seed + 1000);
    const auto found = static_cast<std::size_t>(std::llround(est.estimate * static_cast<double>(est.sample_size)));
    REQUIRE(est.remaining_a.length_bits() == 257 - est.sample_size);
    // Every mismatch seen in the sample is gone from the remaining keys.
    REQUIRE(hamming_distance(est.remaining_a, est.remaining_b) == pair.true_error_count - found);
  }
}

TEST_CASE("Monte-Carlo: estimate is unbiased within 3 standard errors") {
  const auto pair = generate_pair(500, 0.04, 77);
  const double truth = static_cast<double>(pair.true_error_count) / 500.0;
  const int runs = 1000;
  double sum = 0.0;
  double sq = 0.0;
  for (int s = 0; s < runs; ++s) {
    const double e = estimate_qber(pair.key_a, pair.key_b, 0.2, static_cast<std::uint64_t>(s)).estimate;
    sum += e;
    sq += e * e;
  }
  const double mean = sum / runs;
  const double sd = std::sqrt(sq / runs - mean * mean);
  CHECK(std::abs(mean - truth) <= 3.0 * sd / std::sqrt(static_cast<double>(runs)));
}
