#pragma once

#include <gtest/gtest.h>

#include <atomic>
#include <cstddef>
#include <vector>

#include "mcid/mcid.hpp"

namespace mcid::testing {

inline Dataset make_data(std::initializer_list<std::pair<double, int>> pts) {
  std::vector<LabeledSample> s;
  for (auto [x, y] : pts) s.push_back({x, y, {}});
  return Dataset(std::move(s));
}

/// Largest objective increase between consecutive DCA iterates.
inline double worst_increase(std::span<const double> trace) {
  double worst = 0.0;
  for (std::size_t k = 1; k < trace.size(); ++k) worst = std::max(worst, trace[k] - trace[k - 1]);
  return worst;
}

/// Every DCA fit in the suite runs with this observer, so a non-monotone
/// objective trace anywhere fails the test that produced it.
inline DcaConfig checked_dca(DcaConfig config = {}) {
  config.observer = [](const DcaTrace& t) {
    const double worst = worst_increase(t.objective);
    if (worst > 1e-10) ADD_FAILURE() << "DCA objective increased by " << worst;
  };
  return config;
}

}  // namespace mcid::testing
