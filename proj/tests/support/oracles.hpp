#pragma once

// Reference implementations used only by tests. They are written
// independently of the library code paths they check.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

namespace tpmr::testing {

struct OracleOutput {
  std::vector<int> sigma;
  int tau = 0;
};

// Hidden unit k outputs +1 iff its local field is strictly positive; the
// network output is -1 iff an odd number of hidden units output -1.
inline OracleOutput oracle_evaluate(const std::vector<int>& w, const std::vector<int>& x, int k_units,
                                    int n_inputs) {
  OracleOutput out;
  int negatives = 0;
  for (int k = 0; k < k_units; ++k) {
    const auto begin = static_cast<std::ptrdiff_t>(k) * n_inputs;
    const int field = std::inner_product(w.begin() + begin, w.begin() + begin + n_inputs,
                                         x.begin() + begin, 0);
    const int s = field > 0 ? +1 : -1;
    if (s < 0) ++negatives;
    out.sigma.push_back(s);
  }
  out.tau = negatives % 2 == 0 ? +1 : -1;
  return out;
}

inline int oracle_theta(int sigma, int tau) { return sigma == tau ? 1 : 0; }

inline std::vector<int> oracle_hebbian(const std::vector<int>& w, const std::vector<int>& x,
                                       const OracleOutput& out, int k_units, int n_inputs, int bound) {
  std::vector<int> next(w.size());
  for (int k = 0; k < k_units; ++k) {
    for (int n = 0; n < n_inputs; ++n) {
      const auto i = static_cast<std::size_t>(k * n_inputs + n);
      const int moved = w[i] + x[i] * out.sigma[k] * oracle_theta(out.sigma[k], out.tau);
      next[i] = std::max(-bound, std::min(bound, moved));
    }
  }
  return next;
}

// Calls visit(values) for every vector of `length` entries drawn from
// [lo, hi], odometer order.
inline void for_each_vector(int length, int lo, int hi,
                            const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> v(static_cast<std::size_t>(length), lo);
  for (;;) {
    visit(v);
    int i = length - 1;
    while (i >= 0 && v[static_cast<std::size_t>(i)] == hi) {
      v[static_cast<std::size_t>(i)] = lo;
      --i;
    }
    if (i < 0) return;
    ++v[static_cast<std::size_t>(i)];
  }
}

// Every ±1 vector of the given length, as a bit pattern expanded to ±1.
inline std::vector<std::vector<int>> all_inputs(int length) {
  std::vector<std::vector<int>> out;
  for (std::uint32_t bits = 0; bits < (1U << length); ++bits) {
    std::vector<int> x(static_cast<std::size_t>(length));
    for (int i = 0; i < length; ++i) x[static_cast<std::size_t>(i)] = (bits >> i) & 1U ? 1 : -1;
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace tpmr::testing
