#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mcid/data.hpp"
#include "mcid/error.hpp"
#include "mcid/kernels.hpp"
#include "mcid/losses.hpp"
#include "mcid/parallel.hpp"
#include "mcid/personalized.hpp"
#include "mcid/population.hpp"
#include "mcid/rng.hpp"

namespace mcid {

/// {10^((s-31)/10) : s = 1..61}, i.e. 1e-3 .. 1e3 in tenth-decade steps.
inline std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  grid.reserve(61);
  for (int s = 1; s <= 61; ++s) grid.push_back(std::pow(10.0, (s - 31) / 10.0));
  return grid;
}

struct CvPlan {
  std::size_t folds = 5;
  std::vector<double> lambda_grid = default_lambda_grid();
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct CvRow {
  double lambda = 0.0;
  double mean_mce = 0.0;
  std::vector<double> fold_mce;
};

struct CvResult {
  double best_lambda = 0.0;
  std::vector<CvRow> table;  // in grid order
};

/// Fold id per sample. Each label class is shuffled and dealt round-robin
/// so both classes are spread over the folds.
inline std::vector<std::size_t> stratified_folds(std::span<const int> y, std::size_t k,
                                                 std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::DegenerateFold, "need at least 2 folds");
  if (y.size() < k) throw Error(ErrorCode::DegenerateFold, "fewer samples than folds");
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] > 0 ? pos : neg).push_back(i);
  Rng rng(seed);
  rng.shuffle(pos);
  rng.shuffle(neg);
  std::vector<std::size_t> fold(y.size());
  std::size_t slot = 0;
  for (auto i : pos) fold[i] = slot++ % k;
  for (auto i : neg) fold[i] = slot++ % k;
  return fold;
}

/// Selects lambda by k-fold cross-validated misclassification error of the
/// personalized fit. The lowest mean error wins; ties go to the larger
/// lambda. The kernel bandwidth is resolved once on the whole of `train`.
inline CvResult cross_validate(const Dataset& train, const KernelMatrix& full, double delta,
                               const CvPlan& plan, const DcaConfig& config = {}) {
  require_valid(train);
  if (plan.lambda_grid.empty()) throw Error(ErrorCode::BadParameter, "empty lambda grid");
  for (double l : plan.lambda_grid) {
    if (!(l > 0.0)) throw Error(ErrorCode::BadParameter, "lambda grid must be positive");
  }
  const std::size_t n = train.size();
  std::vector<double> x(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = train[i].x;
    y[i] = train[i].y;
  }
  const auto fold_of = stratified_folds(y, plan.folds, plan.seed);

  struct Fold {
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    Matrix K_train;
    Matrix K_test;  // test x train
    std::vector<double> x;
    std::vector<int> y;
    double b0 = 0.0;
  };
  std::vector<Fold> folds(plan.folds);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < plan.folds; ++f) {
      (fold_of[i] == f ? folds[f].test_idx : folds[f].train_idx).push_back(i);
    }
  }
  for (std::size_t f = 0; f < plan.folds; ++f) {
    auto& fd = folds[f];
    if (fd.test_idx.empty()) throw Error(ErrorCode::DegenerateFold, "fold " + std::to_string(f) + " is empty");
    bool has_pos = false;
    bool has_neg = false;
    for (auto i : fd.train_idx) (y[i] > 0 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) {
      throw Error(ErrorCode::DegenerateFold,
                  "training part of fold " + std::to_string(f) + " lacks a label class");
    }
    const auto m = static_cast<Eigen::Index>(fd.train_idx.size());
    const auto t = static_cast<Eigen::Index>(fd.test_idx.size());
    fd.K_train.resize(m, m);
    fd.K_test.resize(t, m);
    for (Eigen::Index c = 0; c < m; ++c) {
      const auto jc = static_cast<Eigen::Index>(fd.train_idx[static_cast<std::size_t>(c)]);
      for (Eigen::Index r = 0; r < m; ++r) {
        fd.K_train(r, c) = full.K(static_cast<Eigen::Index>(fd.train_idx[static_cast<std::size_t>(r)]), jc);
      }
      for (Eigen::Index r = 0; r < t; ++r) {
        fd.K_test(r, c) = full.K(static_cast<Eigen::Index>(fd.test_idx[static_cast<std::size_t>(r)]), jc);
      }
    }
    for (auto i : fd.train_idx) {
      fd.x.push_back(x[i]);
      fd.y.push_back(y[i]);
    }
    fd.b0 = config.init == InitPolicy::PopulationThreshold ? fit_population(train.subset(fd.train_idx)).c_hat
                                                           : 0.0;
  }

  const std::size_t n_grid = plan.lambda_grid.size();
  std::vector<double> mce(n_grid * plan.folds);
  parallel_for(n_grid * plan.folds, plan.threads, [&](std::size_t job) {
    const std::size_t g = job / plan.folds;
    const std::size_t f = job % plan.folds;
    const auto& fd = folds[f];
    DcaSolution sol = dca_fit_gram(fd.K_train, fd.x, fd.y, delta, plan.lambda_grid[g], config, fd.b0);
    const Vector c = (fd.K_test * sol.w).array() + sol.b;
    std::size_t wrong = 0;
    for (std::size_t r = 0; r < fd.test_idx.size(); ++r) {
      const auto i = fd.test_idx[r];
      wrong += y[i] != sign_pos(x[i] - c(static_cast<Eigen::Index>(r))) ? 1 : 0;
    }
    mce[job] = static_cast<double>(wrong) / static_cast<double>(fd.test_idx.size());
  });

  CvResult result;
  for (std::size_t g = 0; g < n_grid; ++g) {
    CvRow row{plan.lambda_grid[g], 0.0, {}};
    for (std::size_t f = 0; f < plan.folds; ++f) {
      row.fold_mce.push_back(mce[g * plan.folds + f]);
      row.mean_mce += mce[g * plan.folds + f];
    }
    row.mean_mce /= static_cast<double>(plan.folds);
    result.table.push_back(std::move(row));
  }
  double best = result.table.front().mean_mce;
  for (const auto& row : result.table) best = std::min(best, row.mean_mce);
  result.best_lambda = 0.0;
  for (const auto& row : result.table) {
    if (row.mean_mce <= best + 1e-12) result.best_lambda = std::max(result.best_lambda, row.lambda);
  }
  return result;
}

inline CvResult cross_validate(const Dataset& train, const KernelSpec& kernel, double delta,
                               const CvPlan& plan, const DcaConfig& config = {}) {
  require_valid(train);
  return cross_validate(train, gram(kernel, covariate_matrix(train)), delta, plan, config);
}

}  // namespace mcid
