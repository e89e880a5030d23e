#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "support.hpp"

using namespace mcid;
using mcid::testing::make_data;
using namespace mcid::testing::oracles;

namespace {

double weighted_cost(const Dataset& d, double c, double w) {
  double t = 0.0;
  for (const auto& s : d) {
    if ((s.x >= c ? 1 : -1) != s.y) t += s.y > 0 ? w : 1.0 - w;
  }
  return t;
}

}  // namespace

TEST(FitPopulation, ToyExample) {
  const auto d = make_data({{1, 1}, {2, 1}, {0, -1}});
  const auto f = fit_population(d);
  EXPECT_EQ(f.c_hat, 1.0);
  EXPECT_EQ(f.empirical_risk, 0.0);
  EXPECT_EQ(f.minimizer_set, std::vector<double>{1.0});
  // candidate risks {1/3, 0, 1/3, 2/3} at {0, 1, 2, 3}
  EXPECT_DOUBLE_EQ(misclassification_rate(d, 0.0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(misclassification_rate(d, 2.0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(misclassification_rate(d, 3.0), 2.0 / 3.0);
}

TEST(FitPopulation, SingleClass) {
  auto f = fit_population(make_data({{0, 1}, {1, 1}}));
  EXPECT_EQ(f.c_hat, 0.0);
  EXPECT_EQ(f.empirical_risk, 0.0);
  f = fit_population(make_data({{0, -1}, {1, -1}}));
  EXPECT_EQ(f.c_hat, 2.0);
  EXPECT_EQ(f.empirical_risk, 0.0);
}

TEST(FitPopulation, TiesGoToLargestMinimizer) {
  // errors at candidates 0,1,2,3,4: 2,1,2,1,2
  const auto d = make_data({{0, -1}, {1, 1}, {2, -1}, {3, 1}});
  const auto f = fit_population(d);
  EXPECT_EQ(f.minimizer_set, (std::vector<double>{1.0, 3.0}));
  EXPECT_EQ(f.c_hat, 3.0);
}

TEST(FitPopulation, DuplicateScores) {
  const auto d = make_data({{1, 1}, {1, -1}, {1, 1}, {0, -1}});
  const auto f = fit_population(d);
  EXPECT_EQ(f.c_hat, 1.0);
  EXPECT_DOUBLE_EQ(f.empirical_risk, 0.25);
}

TEST(FitPopulation, RejectsInvalid) {
  EXPECT_THROW(fit_population(Dataset{}), Error);
  EXPECT_THROW(fit_population(make_data({{1, 2}})), Error);
}

TEST(FitPopulation, OracleEquivalenceLattice) {
  Rng rng(101);
  for (int t = 0; t < 1000; ++t) {
    const auto d = random_lattice(rng, 1 + rng.below(12));
    const auto f = fit_population(d);
    const auto bf = brute_force(d);
    ASSERT_EQ(f.empirical_risk, double(bf.min_errors) / double(d.size()));
    ASSERT_EQ(std::set<double>(f.minimizer_set.begin(), f.minimizer_set.end()), bf.minimizers);
    ASSERT_EQ(f.c_hat, *bf.minimizers.rbegin());
  }
}

TEST(FitPopulation, OracleEquivalenceContinuousScores) {
  Rng rng(202);
  for (int t = 0; t < 500; ++t) {
    const auto d = random_real(rng, 1 + rng.below(12));
    const auto f = fit_population(d);
    // every candidate threshold and every midpoint between them
    std::vector<double> xs;
    for (const auto& s : d) xs.push_back(s.x);
    std::sort(xs.begin(), xs.end());
    std::vector<double> probes = xs;
    probes.push_back(xs.front() - 1.0);
    probes.push_back(xs.back() + 1.0);
    for (std::size_t k = 1; k < xs.size(); ++k) probes.push_back(0.5 * (xs[k - 1] + xs[k]));
    std::size_t best = d.size() + 1;
    std::set<double> mins;
    for (double c : probes) {
      const auto e = errors_at(d, c);
      if (e < best) {
        best = e;
        mins.clear();
      }
      if (e == best) mins.insert(canonical(d, c));
    }
    ASSERT_EQ(f.empirical_risk, double(best) / double(d.size()));
    ASSERT_EQ(std::set<double>(f.minimizer_set.begin(), f.minimizer_set.end()), mins);
  }
}

TEST(FitPopulation, LabelFlipDuality) {
  Rng rng(303);
  for (int t = 0; t < 300; ++t) {
    const auto d = random_real(rng, 2 + rng.below(15));
    std::vector<LabeledSample> m;
    for (const auto& s : d) m.push_back({-s.x, -s.y, {}});
    const Dataset mirror(std::move(m));
    const auto f = fit_population(d);
    const auto g = fit_population(mirror);
    ASSERT_EQ(f.empirical_risk, g.empirical_risk);

    std::vector<double> u;
    for (const auto& s : d) u.push_back(s.x);
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    const double mirror_sentinel = -u.front() + 1.0;
    std::set<double> mapped;
    for (double c : f.minimizer_set) {
      const auto it = std::find(u.begin(), u.end(), c);
      if (it == u.end()) mapped.insert(-u.back());  // original sentinel
      else if (it == u.begin()) mapped.insert(mirror_sentinel);
      else mapped.insert(-*(it - 1));
    }
    ASSERT_EQ(std::set<double>(g.minimizer_set.begin(), g.minimizer_set.end()), mapped);
  }
}

TEST(FitWeighted, HalfWeightMatchesUnweighted) {
  Rng rng(404);
  for (int t = 0; t < 200; ++t) {
    const auto d = random_real(rng, 1 + rng.below(40));
    EXPECT_EQ(fit_weighted(d, 0.5).c_hat, fit_population(d).c_hat);
    EXPECT_EQ(fit_weighted(d, 0.5).minimizer_set, fit_population(d).minimizer_set);
  }
}

TEST(FitWeighted, SmallExample) {
  // weighted costs at candidates {0,1,2,3}: {0.9, 0, 0.1, 0.2}; the unique
  // minimizer is 1
  const auto d = make_data({{0, -1}, {1, 1}, {2, 1}});
  const auto f = fit_weighted(d, 0.1);
  EXPECT_EQ(f.c_hat, 1.0);
  EXPECT_EQ(f.empirical_risk, 0.0);
  EXPECT_NEAR(weighted_empirical_risk(d, 2.0, 0.1), 0.1 / 3.0, 1e-15);
  EXPECT_NEAR(weighted_empirical_risk(d, 0.0, 0.1), 0.9 / 3.0, 1e-15);
}

TEST(FitWeighted, WeightShiftsTheThreshold) {
  // with one misordered pair the weight decides which error to accept
  const auto d = make_data({{0, -1}, {1, 1}, {2, -1}, {3, 1}});
  EXPECT_EQ(fit_weighted(d, 0.2).c_hat, 3.0);  // positives cheap: flag few
  EXPECT_EQ(fit_weighted(d, 0.8).c_hat, 1.0);  // positives costly: flag many
}

TEST(FitWeighted, BadWeight) {
  const auto d = make_data({{0, 1}});
  for (double w : {0.0, 1.0, -0.1, 1.5}) {
    try {
      fit_weighted(d, w);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::BadWeight);
    }
  }
}

TEST(FitWeighted, MatchesBruteForce) {
  Rng rng(505);
  for (int t = 0; t < 500; ++t) {
    const auto d = random_lattice(rng, 1 + rng.below(12));
    const double w = rng.uniform(0.01, 0.99);
    const auto f = fit_weighted(d, w);
    double best = 1e300;
    for (double c = -1.0; c <= 6.0; c += 1.0) best = std::min(best, weighted_cost(d, c, w));
    EXPECT_NEAR(weighted_cost(d, f.c_hat, w), best, 1e-12);
    EXPECT_NEAR(f.empirical_risk, best / double(d.size()), 1e-12);
  }
}

TEST(FitWeighted, MonotoneConservatism) {
  Rng rng(606);
  for (int t = 0; t < 200; ++t) {
    const auto d = random_real(rng, 2 + rng.below(30));
    double prev = std::numeric_limits<double>::infinity();
    for (double w = 0.05; w < 0.99; w += 0.05) {
      const double c = fit_weighted(d, w).c_hat;
      ASSERT_LE(c, prev);
      prev = c;
    }
  }
}

TEST(FitWeighted, PopulationRootOfWeight) {
  Rng rng(707);
  std::vector<LabeledSample> s;
  for (int i = 0; i < 100000; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    s.push_back({x, rng.bernoulli((x + 1.0) / 2.0) ? 1 : -1, {}});
  }
  EXPECT_NEAR(fit_weighted(Dataset(std::move(s)), 0.3).c_hat, 0.4, 0.02);
}

TEST(FitWeighted, PopulationRootOfWeightOnAverage) {
  constexpr int reps = 40;
  double sum = 0.0;
  double sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    Rng rng(derive_seed(708, static_cast<std::uint64_t>(r)));
    std::vector<LabeledSample> s;
    for (int i = 0; i < 100000; ++i) {
      const double x = rng.uniform(-1.0, 1.0);
      s.push_back({x, rng.bernoulli((x + 1.0) / 2.0) ? 1 : -1, {}});
    }
    const double c = fit_weighted(Dataset(std::move(s)), 0.3).c_hat;
    sum += c;
    sq += c * c;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sq / reps - mean * mean) / (reps - 1));
  EXPECT_LE(std::abs(mean - 0.4), 3.0 * se);
}

TEST(FitNeymanPearson, Example) {
  const auto d = make_data({{0, -1}, {1, -1}, {2, 1}});
  const auto f = fit_neyman_pearson(d, 0.5);
  EXPECT_EQ(f.c_hat, 1.0);
  EXPECT_DOUBLE_EQ(f.type1_error, 0.5);
  EXPECT_EQ(f.type2_error, 0.0);
}

TEST(FitNeymanPearson, SlackConstraintOnSeparableData) {
  const auto d = make_data({{0, -1}, {1, 1}, {2, 1}, {3, 1}});
  EXPECT_EQ(fit_neyman_pearson(d, 0.99).c_hat, fit_population(d).c_hat);
}

TEST(FitNeymanPearson, TinyAlphaExcludesAllNegatives) {
  auto d = make_data({{0, 1}, {1, -1}, {2, 1}, {5, 1}});
  auto f = fit_neyman_pearson(d, 1e-6);
  EXPECT_EQ(f.c_hat, 2.0);
  EXPECT_EQ(f.type1_error, 0.0);
  d = make_data({{0, 1}, {1, -1}, {3, -1}});
  f = fit_neyman_pearson(d, 1e-6);
  EXPECT_EQ(f.c_hat, 4.0);  // sentinel
  EXPECT_EQ(f.type1_error, 0.0);
}

TEST(FitNeymanPearson, Errors) {
  const auto d = make_data({{0, 1}, {1, 1}});
  try {
    fit_neyman_pearson(d, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyNegativeClass);
  }
  EXPECT_THROW(fit_neyman_pearson(make_data({{0, -1}}), 0.0), Error);
  EXPECT_THROW(fit_neyman_pearson(make_data({{0, -1}}), 1.0), Error);
}

TEST(FitNeymanPearson, MatchesBruteForce) {
  Rng rng(808);
  for (int t = 0; t < 500; ++t) {
    auto d = random_lattice(rng, 2 + rng.below(12));
    if (d.count_label(-1) == 0) continue;
    const double alpha = rng.uniform(0.01, 0.99);
    const auto f = fit_neyman_pearson(d, alpha);
    const double n_neg = double(d.count_label(-1));
    std::size_t best_fn = d.size() + 1;
    double best_c = 0.0;
    for (double c = 0.0; c <= 6.0; c += 1.0) {
      std::size_t fp = 0;
      std::size_t fn = 0;
      for (const auto& s : d) {
        if (s.y < 0 && s.x >= c) ++fp;
        if (s.y > 0 && s.x < c) ++fn;
      }
      if (double(fp) <= alpha * n_neg && fn < best_fn) {
        best_fn = fn;
        best_c = c;
      }
    }
    // smallest feasible c with the least type-II error, as canonical breakpoint
    EXPECT_EQ(f.c_hat, canonical(d, best_c));
  }
}

TEST(FitNeymanPearson, SolutionLiesOnWeightedPath) {
  Rng rng(909);
  for (int t = 0; t < 200; ++t) {
    const auto d = random_real(rng, 4 + rng.below(30));
    const auto n_neg = d.count_label(-1);
    if (n_neg == 0) continue;
    for (double w = 0.05; w < 0.99; w += 0.1) {
      const auto fw = fit_weighted(d, w);
      std::size_t fp = 0;
      for (const auto& s : d) fp += (s.y < 0 && s.x >= fw.c_hat) ? 1 : 0;
      const double alpha = (double(fp) + 0.5) / double(n_neg);
      if (alpha >= 1.0) continue;
      const auto np = fit_neyman_pearson(d, alpha);
      ASSERT_TRUE(std::find(fw.minimizer_set.begin(), fw.minimizer_set.end(), np.c_hat) != fw.minimizer_set.end())
          << "w=" << w;
    }
  }
}

TEST(IdealMcid, Oracles) {
  const auto pop1 = PopulationSpec::uniform(-1.0, 1.0, [](double x) { return (x + 1.0) / 2.0; });
  EXPECT_NEAR(ideal_mcid(pop1), 0.0, 1e-10);
  EXPECT_NEAR(ideal_mcid(pop1, 0.3), 0.4, 1e-9);
  EXPECT_NEAR(ideal_mcid(population_spec(ScenarioId::Pop2)), -0.514, 1e-3);
  EXPECT_THROW(ideal_mcid(pop1, 1.0), Error);
}

TEST(PopulationSimulation, Pop1AtFiveHundred) {
  const auto r = run_replications({ScenarioId::Pop1, 500, 2000, 0}, MethodSpec{}, 100, 12345, 1);
  EXPECT_EQ(r.failures, 0u);
  EXPECT_LE(std::abs(*r.mean_c_hat), 0.03);
  EXPECT_LE(r.mean_mce, 0.258);
}

TEST(PopulationSimulation, Pop2AtThousand) {
  const auto r = run_replications({ScenarioId::Pop2, 1000, 2000, 0}, MethodSpec{}, 100, 777, 1);
  EXPECT_NEAR(*r.mean_c_hat, -0.497, 0.02);
}

TEST(PopulationSimulation, Pop2MeanWithinThreeStandardErrorsOfMedian) {
  const auto r = run_replications({ScenarioId::Pop2, 1000, 2000, 0}, MethodSpec{}, 100, 778, 1);
  EXPECT_LE(std::abs(*r.mean_c_hat - oracle_threshold(ScenarioId::Pop2)), 3.0 * *r.se_c_hat);
}

TEST(PopulationSimulation, ConsistencyTrend) {
  double prev = 1e9;
  for (std::size_t n : {250u, 1000u, 4000u}) {
    const auto r = run_replications({ScenarioId::Pop1, n, 200, 0}, MethodSpec{}, 50, 99, 1);
    EXPECT_LT(*r.median_abs_c_error, prev) << n;
    prev = *r.median_abs_c_error;
  }
}
