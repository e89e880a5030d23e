#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "mcid/mcid.hpp"

// Brute-force references for the population estimator, shared by the unit
// tests and the acceptance binary.
namespace mcid::testing::oracles {

inline std::size_t errors_at(const Dataset& d, double c) {
  std::size_t wrong = 0;
  for (const auto& s : d) wrong += (s.x >= c ? 1 : -1) != s.y ? 1 : 0;
  return wrong;
}

// Threshold that represents c: every c in (u_{k-1}, u_k] classifies the
// same way as the breakpoint u_k; above the largest x, the sentinel.
inline double canonical(const Dataset& d, double c) {
  double best = std::numeric_limits<double>::infinity();
  double mx = -std::numeric_limits<double>::infinity();
  for (const auto& s : d) {
    if (s.x >= c) best = std::min(best, s.x);
    mx = std::max(mx, s.x);
  }
  return std::isinf(best) ? mx + 1.0 : best;
}

struct BruteForce {
  std::size_t min_errors;
  std::set<double> minimizers;
};

// Exhaustive 0-1 risk over a dense grid of 10n points spanning
// [min x - 1, max x + 1], plus every data point.
inline BruteForce brute_force(const Dataset& d) {
  double lo = d[0].x;
  double hi = d[0].x;
  for (const auto& s : d) {
    lo = std::min(lo, s.x);
    hi = std::max(hi, s.x);
  }
  std::vector<double> grid;
  const std::size_t m = 10 * d.size();
  for (std::size_t k = 0; k < m; ++k) grid.push_back(lo - 1.0 + (hi - lo + 2.0) * double(k) / double(m - 1));
  for (const auto& s : d) grid.push_back(s.x);
  BruteForce out{d.size() + 1, {}};
  for (double c : grid) {
    const auto e = errors_at(d, c);
    if (e < out.min_errors) {
      out.min_errors = e;
      out.minimizers.clear();
    }
    if (e == out.min_errors) out.minimizers.insert(canonical(d, c));
  }
  return out;
}

inline Dataset random_lattice(Rng& rng, std::size_t n) {
  std::vector<LabeledSample> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back({double(rng.below(6)), rng.bernoulli(0.5) ? 1 : -1, {}});
  return Dataset(std::move(s));
}

inline Dataset random_real(Rng& rng, std::size_t n) {
  std::vector<LabeledSample> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back({rng.normal(), rng.bernoulli(0.5) ? 1 : -1, {}});
  return Dataset(std::move(s));
}

}  // namespace mcid::testing::oracles
