#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mcid/data.hpp"
#include "mcid/error.hpp"
#include "mcid/losses.hpp"
#include "mcid/numerics.hpp"

namespace mcid {

enum class ThresholdMode { Unweighted, Weighted, NeymanPearson };

inline std::string to_string(ThresholdMode mode) {
  switch (mode) {
    case ThresholdMode::Unweighted: return "unweighted";
    case ThresholdMode::Weighted: return "weighted";
    case ThresholdMode::NeymanPearson: return "neyman-pearson";
  }
  return "unknown";
}

/// A fitted covariate-free threshold. Predictions are sign(x - c_hat) with
/// sign(0) = +1.
struct ThresholdFit {
  double c_hat = 0.0;
  /// Empirical objective at c_hat: misclassification rate for Unweighted and
  /// NeymanPearson, (1/n) sum w(y_i) 1{y_i != sign(x_i - c)} for Weighted.
  double empirical_risk = 0.0;
  /// Every candidate threshold attaining the optimum, ascending.
  std::vector<double> minimizer_set;
  double weight_w = 0.5;
  ThresholdMode mode = ThresholdMode::Unweighted;
  double alpha = 0.0;  // NeymanPearson only
  /// Empirical type-I error P(x >= c | y = -1) and type-II error
  /// P(x < c | y = +1) at c_hat; 0 when the class is absent.
  double type1_error = 0.0;
  double type2_error = 0.0;
  std::size_t n = 0;
};

/// Error counts at one candidate threshold.
struct ThresholdCandidate {
  double c;
  std::size_t false_negatives;  // y = +1, x < c
  std::size_t false_positives;  // y = -1, x >= c
};

/// Candidates are the sorted distinct scores plus max(x) + 1, which
/// represents "predict every patient negative". O(n log n).
inline std::vector<ThresholdCandidate> threshold_candidates(const Dataset& data) {
  struct Point {
    double x;
    int y;
  };
  std::vector<Point> pts;
  pts.reserve(data.size());
  std::size_t n_neg = 0;
  for (const auto& s : data) {
    pts.push_back({s.x, s.y});
    if (s.y < 0) ++n_neg;
  }
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x; });

  std::vector<ThresholdCandidate> out;
  out.reserve(pts.size() + 1);
  std::size_t pos_below = 0;
  std::size_t neg_below = 0;
  std::size_t i = 0;
  while (i < pts.size()) {
    double value = pts[i].x;
    out.push_back({value, pos_below, n_neg - neg_below});
    while (i < pts.size() && pts[i].x == value) {
      (pts[i].y > 0 ? pos_below : neg_below) += 1;
      ++i;
    }
  }
  out.push_back({pts.back().x + 1.0, pos_below, 0});
  return out;
}

/// (1/n) sum w(y_i) 1{y_i != sign(x_i - c)}, w(+1) = w, w(-1) = 1 - w.
/// With w = 1/2 this is half the misclassification rate; use
/// misclassification_rate() for the unweighted risk.
inline double weighted_empirical_risk(const Dataset& data, double c, double w) {
  double total = 0.0;
  for (const auto& s : data) {
    if (s.y != sign_pos(s.x - c)) total += s.y > 0 ? w : 1.0 - w;
  }
  return total / static_cast<double>(data.size());
}

inline double misclassification_rate(const Dataset& data, double c) {
  std::size_t wrong = 0;
  for (const auto& s : data) wrong += s.y != sign_pos(s.x - c) ? 1 : 0;
  return static_cast<double>(wrong) / static_cast<double>(data.size());
}

namespace detail {

inline void require_fit_input(const Dataset& train) {
  if (train.empty()) throw Error(ErrorCode::EmptyDataset, "training set is empty");
  require_valid(train);
}

inline void fill_error_rates(ThresholdFit& fit, const ThresholdCandidate& at, std::size_t n_pos,
                             std::size_t n_neg) {
  fit.type1_error = n_neg ? static_cast<double>(at.false_positives) / static_cast<double>(n_neg) : 0.0;
  fit.type2_error = n_pos ? static_cast<double>(at.false_negatives) / static_cast<double>(n_pos) : 0.0;
}

}  // namespace detail

/// Exact minimizer of the empirical 0-1 risk over a scalar threshold. Ties
/// resolve to the largest minimizing candidate.
inline ThresholdFit fit_population(const Dataset& train) {
  detail::require_fit_input(train);
  auto cands = threshold_candidates(train);
  std::size_t best = SIZE_MAX;
  for (const auto& c : cands) best = std::min(best, c.false_negatives + c.false_positives);

  ThresholdFit fit;
  fit.n = train.size();
  fit.mode = ThresholdMode::Unweighted;
  const ThresholdCandidate* chosen = nullptr;
  for (const auto& c : cands) {
    if (c.false_negatives + c.false_positives == best) {
      fit.minimizer_set.push_back(c.c);
      chosen = &c;
    }
  }
  fit.c_hat = chosen->c;
  fit.empirical_risk = static_cast<double>(best) / static_cast<double>(fit.n);
  detail::fill_error_rates(fit, *chosen, train.count_label(1), train.count_label(-1));
  return fit;
}

/// Minimizer of the weighted empirical 0-1 risk with w(+1) = w and
/// w(-1) = 1 - w. Ties resolve to the largest minimizing candidate.
inline ThresholdFit fit_weighted(const Dataset& train, double w) {
  if (!(w > 0.0 && w < 1.0)) {
    throw Error(ErrorCode::BadWeight, "weight must lie in (0, 1), got " + std::to_string(w));
  }
  detail::require_fit_input(train);
  auto cands = threshold_candidates(train);
  auto cost = [w](const ThresholdCandidate& c) {
    return w * static_cast<double>(c.false_negatives) +
           (1.0 - w) * static_cast<double>(c.false_positives);
  };
  double best = cost(cands.front());
  for (const auto& c : cands) best = std::min(best, cost(c));
  // costs are integer combinations; anything within rounding of best ties
  const double slack = 1e-12 * static_cast<double>(train.size());

  ThresholdFit fit;
  fit.n = train.size();
  fit.mode = ThresholdMode::Weighted;
  fit.weight_w = w;
  const ThresholdCandidate* chosen = nullptr;
  for (const auto& c : cands) {
    if (cost(c) <= best + slack) {
      fit.minimizer_set.push_back(c.c);
      chosen = &c;
    }
  }
  fit.c_hat = chosen->c;
  fit.empirical_risk = cost(*chosen) / static_cast<double>(fit.n);
  detail::fill_error_rates(fit, *chosen, train.count_label(1), train.count_label(-1));
  return fit;
}

/// Smallest candidate whose empirical type-I error is at most alpha. Since
/// the type-II error is nondecreasing in c this minimizes it under the
/// constraint. The sentinel candidate always has type-I error 0, so the
/// problem is never infeasible.
inline ThresholdFit fit_neyman_pearson(const Dataset& train, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::BadParameter, "alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
  detail::require_fit_input(train);
  std::size_t n_neg = train.count_label(-1);
  std::size_t n_pos = train.count_label(1);
  if (n_neg == 0) throw Error(ErrorCode::EmptyNegativeClass, "no negative samples to bound type-I error");

  auto cands = threshold_candidates(train);
  auto feasible = [&](const ThresholdCandidate& c) {
    return static_cast<double>(c.false_positives) <= alpha * static_cast<double>(n_neg);
  };
  auto first = std::find_if(cands.begin(), cands.end(), feasible);

  ThresholdFit fit;
  fit.n = train.size();
  fit.mode = ThresholdMode::NeymanPearson;
  fit.alpha = alpha;
  fit.c_hat = first->c;
  for (auto it = first; it != cands.end() && it->false_negatives == first->false_negatives; ++it) {
    if (feasible(*it)) fit.minimizer_set.push_back(it->c);
  }
  fit.empirical_risk = static_cast<double>(first->false_negatives + first->false_positives) /
                       static_cast<double>(fit.n);
  detail::fill_error_rates(fit, *first, n_pos, n_neg);
  return fit;
}

/// Root of p(c) = 1 - w on the support of `spec`, to 1e-10. With w = 1/2
/// this is the population MCID.
inline double ideal_mcid(const PopulationSpec& spec, double w = 0.5) {
  if (!(w > 0.0 && w < 1.0)) throw Error(ErrorCode::BadWeight, "weight must lie in (0, 1)");
  return numerics::bisect_root([&](double c) { return spec.p(c) - (1.0 - w); }, spec.a, spec.b,
                               1e-10);
}

}  // namespace mcid
