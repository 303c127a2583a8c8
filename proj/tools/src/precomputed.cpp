#include "commands.hpp"

namespace tpmr::cli {

namespace {

struct Row {
  int l;
  int qber;
  int n;
  int k;
  std::uint32_t recommended;
};

// 256-bit keys.
constexpr Row kTable[] = {
    {2, 1, 2, 43, 154},  {2, 1, 43, 2, 51},   {2, 2, 2, 43, 179},  {2, 2, 43, 2, 59},
    {2, 2, 86, 1, 24},   {2, 3, 2, 43, 188},  {2, 3, 43, 2, 64},   {2, 3, 86, 1, 25},
    {3, 1, 2, 43, 218},  {3, 1, 43, 2, 71},   {3, 1, 86, 1, 33},   {3, 2, 2, 43, 309},
    {3, 2, 43, 2, 94},   {3, 2, 86, 1, 39},   {3, 3, 2, 43, 325},  {3, 3, 43, 2, 97},
    {3, 3, 86, 1, 40},   {4, 1, 2, 32, 450},  {4, 1, 4, 16, 496},  {4, 1, 8, 8, 301},
    {4, 1, 16, 4, 176},  {4, 1, 32, 2, 125},  {4, 2, 2, 32, 554},  {4, 2, 4, 16, 701},
    {4, 2, 8, 8, 483},   {4, 2, 16, 4, 264},  {4, 2, 32, 2, 152},  {4, 3, 2, 32, 609},
    {4, 3, 4, 16, 772},  {4, 3, 8, 8, 542},   {4, 3, 16, 4, 302},  {4, 3, 32, 2, 164},
};

}  // namespace

std::optional<std::uint32_t> precomputed_recommendation(std::size_t key_bits, int l, double qber_percent,
                                                        const Structure& s) {
  if (key_bits != 256) return std::nullopt;
  for (const auto& row : kTable) {
    if (row.l == l && static_cast<double>(row.qber) == qber_percent && row.n == s.n && row.k == s.k) {
      return row.recommended;
    }
  }
  return std::nullopt;
}

}  // namespace tpmr::cli
