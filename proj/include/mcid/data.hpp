#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcid/error.hpp"
#include "mcid/rng.hpp"

namespace mcid {

/// One patient: diagnostic score x, outcome label y in {-1,+1}, covariates z.
struct LabeledSample {
  double x = 0.0;
  int y = 1;
  std::vector<double> z;
};

/// Ordered collection of samples. Construction does not validate; call
/// validate() or require_valid() before fitting.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<LabeledSample> samples) : samples_(std::move(samples)) {}

  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }

  const LabeledSample& operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<LabeledSample>& samples() const noexcept { return samples_; }

  auto begin() const noexcept { return samples_.begin(); }
  auto end() const noexcept { return samples_.end(); }

  /// Covariate dimension of the first sample (0 for an empty dataset).
  std::size_t covariate_dim() const noexcept {
    return samples_.empty() ? 0 : samples_.front().z.size();
  }

  std::size_t count_label(int label) const noexcept {
    return static_cast<std::size_t>(std::count_if(
        samples_.begin(), samples_.end(), [label](const auto& s) { return s.y == label; }));
  }

  Dataset subset(std::span<const std::size_t> indices) const {
    std::vector<LabeledSample> out;
    out.reserve(indices.size());
    for (auto i : indices) out.push_back(samples_.at(i));
    return Dataset(std::move(out));
  }

 private:
  std::vector<LabeledSample> samples_;
};

struct ValidationIssue {
  ErrorCode code;
  std::size_t row;  // 0-based sample index
  std::string message;
};

struct ValidationReport {
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
  std::size_t covariate_dim = 0;
  std::size_t duplicate_x = 0;  // samples whose x equals an earlier sample's x
  std::size_t non_finite = 0;
  std::vector<ValidationIssue> issues;

  bool valid() const noexcept { return issues.empty(); }
};

/// Inspects a dataset without modifying it. Every problem found is listed.
inline ValidationReport validate(const Dataset& data) {
  ValidationReport report;
  if (data.empty()) {
    report.issues.push_back({ErrorCode::EmptyDataset, 0, "dataset has no samples"});
    return report;
  }
  report.covariate_dim = data.covariate_dim();
  std::vector<double> xs;
  xs.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& s = data[i];
    if (s.y == 1) {
      ++report.n_positive;
    } else if (s.y == -1) {
      ++report.n_negative;
    } else {
      report.issues.push_back({ErrorCode::NonBinaryLabel, i,
                               "label " + std::to_string(s.y) + " is not -1 or +1"});
    }
    bool finite = std::isfinite(s.x);
    for (double v : s.z) finite = finite && std::isfinite(v);
    if (!finite) {
      ++report.non_finite;
      report.issues.push_back({ErrorCode::NonFiniteValue, i, "non-finite score or covariate"});
    }
    if (s.z.size() != report.covariate_dim) {
      report.issues.push_back({ErrorCode::MixedCovariateDim, i,
                               "covariate dimension " + std::to_string(s.z.size()) +
                                   " differs from " + std::to_string(report.covariate_dim)});
    }
    if (std::isfinite(s.x)) xs.push_back(s.x);
  }
  std::sort(xs.begin(), xs.end());
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] == xs[i - 1]) ++report.duplicate_x;
  }
  return report;
}

/// Throws the first validation issue, if any.
inline void require_valid(const Dataset& data) {
  auto report = validate(data);
  if (!report.valid()) {
    const auto& issue = report.issues.front();
    throw Error(issue.code, "row " + std::to_string(issue.row) + ": " + issue.message);
  }
}

struct SplitPlan {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::uint64_t seed = 0;
};

/// Uniformly random train/test partition. Indices are returned sorted.
inline SplitPlan split(const Dataset& data, std::size_t n_train, std::uint64_t seed) {
  if (n_train == 0 || n_train >= data.size()) {
    throw Error(ErrorCode::BadSplitSize, "need 0 < n_train < " + std::to_string(data.size()) +
                                             ", got " + std::to_string(n_train));
  }
  std::vector<std::size_t> perm(data.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(perm);
  SplitPlan plan;
  plan.seed = seed;
  plan.train_indices.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  plan.test_indices.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(plan.train_indices.begin(), plan.train_indices.end());
  std::sort(plan.test_indices.begin(), plan.test_indices.end());
  return plan;
}

}  // namespace mcid
