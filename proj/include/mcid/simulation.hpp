#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "mcid/data.hpp"
#include "mcid/error.hpp"
#include "mcid/kernels.hpp"
#include "mcid/losses.hpp"
#include "mcid/model_selection.hpp"
#include "mcid/numerics.hpp"
#include "mcid/parallel.hpp"
#include "mcid/personalized.hpp"
#include "mcid/population.hpp"
#include "mcid/rng.hpp"

namespace mcid {

// Synthetic designs.
//   Pop1:  X ~ Unif(-1,1),                P(Y=1|x) = (x+1)/2
//   Pop2:  X ~ 0.7 N(-1,1) + 0.3 N(1,1),  P(Y=1|x) = F(x), F the mixture CDF
//   Pers1: Z ~ N_2(0,I), X|Z ~ N(m(Z),1), m(z) = z1 + 2 z2
//   Pers2: Z ~ N_2(0,I), m(z) = z1 + 2 z2 - z1^2 - 2 z2^2
//   Pers3: Z ~ N_3(0,I), m(z) = cos(z1 + 1.5 z2 + 2 z3)
// In the personalized designs P(Y=1|x,z) = Phi(x - m(z)), so c*(z) = m(z).

enum class ScenarioId { Pop1, Pop2, Pers1, Pers2, Pers3 };

inline std::string to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::Pop1: return "pop1";
    case ScenarioId::Pop2: return "pop2";
    case ScenarioId::Pers1: return "pers1";
    case ScenarioId::Pers2: return "pers2";
    case ScenarioId::Pers3: return "pers3";
  }
  return "unknown";
}

inline ScenarioId parse_scenario(std::string_view s) {
  for (auto id : {ScenarioId::Pop1, ScenarioId::Pop2, ScenarioId::Pers1, ScenarioId::Pers2,
                  ScenarioId::Pers3}) {
    if (s == to_string(id)) return id;
  }
  throw Error(ErrorCode::BadParameter, "unknown scenario '" + std::string(s) + "'");
}

inline bool is_personalized(ScenarioId id) {
  return id == ScenarioId::Pers1 || id == ScenarioId::Pers2 || id == ScenarioId::Pers3;
}

inline std::size_t covariate_dim(ScenarioId id) {
  switch (id) {
    case ScenarioId::Pers1:
    case ScenarioId::Pers2: return 2;
    case ScenarioId::Pers3: return 3;
    default: return 0;
  }
}

struct SimulationScenario {
  ScenarioId id = ScenarioId::Pop1;
  std::size_t n_train = 500;
  std::size_t n_test = 2000;
  std::uint64_t seed = 0;

  void check() const {
    if (n_train == 0 || n_test == 0) throw Error(ErrorCode::BadParameter, "n_train and n_test must be positive");
  }
};

inline double mixture_cdf(double x) {
  return 0.7 * numerics::normal_cdf(x + 1.0) + 0.3 * numerics::normal_cdf(x - 1.0);
}

inline double mixture_pdf(double x) {
  return 0.7 * numerics::normal_pdf(x + 1.0) + 0.3 * numerics::normal_pdf(x - 1.0);
}

/// Law of (X, Y) for the covariate-free designs. Pop2's support is
/// truncated to [-12, 12], which carries all but ~1e-30 of the mass.
inline PopulationSpec population_spec(ScenarioId id) {
  switch (id) {
    case ScenarioId::Pop1:
      return PopulationSpec::uniform(-1.0, 1.0, [](double x) { return (x + 1.0) / 2.0; });
    case ScenarioId::Pop2:
      return PopulationSpec{-12.0, 12.0, mixture_pdf, mixture_cdf, 1e-8};
    default:
      throw Error(ErrorCode::BadParameter, to_string(id) + " has covariates; no scalar population spec");
  }
}

/// Mean of X given z, which is also the true personalized MCID c*(z).
inline double conditional_mean(ScenarioId id, std::span<const double> z) {
  switch (id) {
    case ScenarioId::Pers1: return z[0] + 2.0 * z[1];
    case ScenarioId::Pers2: return z[0] + 2.0 * z[1] - z[0] * z[0] - 2.0 * z[1] * z[1];
    case ScenarioId::Pers3: return std::cos(z[0] + 1.5 * z[1] + 2.0 * z[2]);
    default: throw Error(ErrorCode::BadParameter, to_string(id) + " has no covariates");
  }
}

/// True MCID at covariates z (ignored for the population designs).
inline double oracle_threshold(ScenarioId id, std::span<const double> z = {}) {
  switch (id) {
    case ScenarioId::Pop1: return 0.0;
    case ScenarioId::Pop2: {
      static const double median = ideal_mcid(population_spec(ScenarioId::Pop2));
      return median;
    }
    default: return conditional_mean(id, z);
  }
}

/// Draws one sample from the design.
inline LabeledSample draw_sample(ScenarioId id, Rng& rng) {
  LabeledSample s;
  switch (id) {
    case ScenarioId::Pop1:
      s.x = rng.uniform(-1.0, 1.0);
      s.y = rng.bernoulli((s.x + 1.0) / 2.0) ? 1 : -1;
      break;
    case ScenarioId::Pop2: {
      const bool first = rng.bernoulli(0.7);
      s.x = rng.normal(first ? -1.0 : 1.0, 1.0);
      s.y = rng.bernoulli(mixture_cdf(s.x)) ? 1 : -1;
      break;
    }
    default: {
      s.z.resize(covariate_dim(id));
      for (auto& v : s.z) v = rng.normal();
      const double m = conditional_mean(id, s.z);
      s.x = rng.normal(m, 1.0);
      s.y = rng.bernoulli(numerics::normal_cdf(s.x - m)) ? 1 : -1;
      break;
    }
  }
  return s;
}

/// n_train + n_test samples are drawn and a random n_train of them kept for
/// training. Deterministic in scenario.seed.
inline std::pair<Dataset, Dataset> generate(const SimulationScenario& scenario) {
  scenario.check();
  Rng rng(derive_seed(scenario.seed, 0));
  std::vector<LabeledSample> all;
  all.reserve(scenario.n_train + scenario.n_test);
  for (std::size_t i = 0; i < scenario.n_train + scenario.n_test; ++i) {
    all.push_back(draw_sample(scenario.id, rng));
  }
  Dataset pool(std::move(all));
  const auto plan = split(pool, scenario.n_train, derive_seed(scenario.seed, 1));
  return {pool.subset(plan.train_indices), pool.subset(plan.test_indices)};
}

/// Fraction of test rows with y != sign(x - c).
inline double mce(double threshold, const Dataset& test) {
  if (test.empty()) throw Error(ErrorCode::EmptyDataset, "test set is empty");
  return misclassification_rate(test, threshold);
}

/// Fraction of test rows with y != sign(x - c(z)).
inline double mce(const PersonalizedModel& model, const Dataset& test) {
  if (test.empty()) throw Error(ErrorCode::EmptyDataset, "test set is empty");
  const Vector c = model.predict(covariate_matrix(test));
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    wrong += test[i].y != sign_pos(test[i].x - c(static_cast<Eigen::Index>(i))) ? 1 : 0;
  }
  return static_cast<double>(wrong) / static_cast<double>(test.size());
}

/// Misclassification error of the true MCID on `test`.
inline double oracle_mce(ScenarioId id, const Dataset& test) {
  if (test.empty()) throw Error(ErrorCode::EmptyDataset, "test set is empty");
  std::size_t wrong = 0;
  for (const auto& s : test) wrong += s.y != sign_pos(s.x - oracle_threshold(id, s.z)) ? 1 : 0;
  return static_cast<double>(wrong) / static_cast<double>(test.size());
}

enum class MethodKind { Population, PersonalizedLinear, PersonalizedGaussian };

inline std::string to_string(MethodKind kind) {
  switch (kind) {
    case MethodKind::Population: return "population";
    case MethodKind::PersonalizedLinear: return "personalized-linear";
    case MethodKind::PersonalizedGaussian: return "personalized-gaussian";
  }
  return "unknown";
}

inline MethodKind parse_method(std::string_view s) {
  for (auto k : {MethodKind::Population, MethodKind::PersonalizedLinear,
                 MethodKind::PersonalizedGaussian}) {
    if (s == to_string(k)) return k;
  }
  throw Error(ErrorCode::BadParameter, "unknown method '" + std::string(s) + "'");
}

struct MethodSpec {
  MethodKind kind = MethodKind::Population;
  double delta = 0.1;
  std::optional<double> lambda;  // empty: choose by cross-validation
  std::size_t folds = 5;
  std::vector<double> lambda_grid = default_lambda_grid();
  BandwidthRule bandwidth = BandwidthRule::MedianDistance;
  DcaConfig dca;

  KernelSpec kernel() const {
    return kind == MethodKind::PersonalizedGaussian ? KernelSpec::gaussian_median(bandwidth)
                                                    : KernelSpec::linear();
  }
};

/// A personalized fit with lambda either fixed or chosen by CV.
struct PersonalizedFit {
  PersonalizedModel model;
  std::optional<CvResult> cv;
};

inline PersonalizedFit fit_personalized(const Dataset& train, const KernelSpec& kernel,
                                        const MethodSpec& method, std::uint64_t cv_seed,
                                        std::size_t threads = 1) {
  require_valid(train);
  const KernelMatrix km = gram(kernel, covariate_matrix(train));
  PersonalizedFit out;
  double lambda = 0.0;
  if (method.lambda) {
    lambda = *method.lambda;
  } else {
    CvPlan plan{method.folds, method.lambda_grid, cv_seed, threads};
    out.cv = cross_validate(train, km, method.delta, plan, method.dca);
    lambda = out.cv->best_lambda;
  }
  out.model = dca_fit(train, km, method.delta, lambda, method.dca);
  return out;
}

struct RepResult {
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  double mce = 0.0;
  double oracle_mce = 0.0;
  std::optional<double> c_hat;      // population method
  std::optional<double> lambda;     // personalized methods
  std::optional<double> mean_abs_error;  // mean |c_hat(z) - c*(z)| over the test set
  std::optional<std::string> error;
};

struct ReplicationReport {
  ScenarioId scenario = ScenarioId::Pop1;
  MethodKind method = MethodKind::Population;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::uint64_t base_seed = 0;
  std::vector<RepResult> reps;
  std::size_t failures = 0;
  double mean_mce = 0.0;
  std::optional<double> se_mce;
  double mean_oracle_mce = 0.0;
  std::optional<double> mean_c_hat;
  std::optional<double> se_c_hat;
  std::optional<double> median_abs_c_error;  // population method: median |c_hat - c*|
  std::optional<double> mean_abs_error;
  double runtime_seconds = 0.0;
};

/// Mean and standard error (sample sd / sqrt(count)); SE needs >= 2 values.
inline std::pair<double, std::optional<double>> mean_and_se(const std::vector<double>& v) {
  if (v.empty()) return {0.0, std::nullopt};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, std::nullopt};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return {mean, sd / std::sqrt(static_cast<double>(v.size()))};
}

inline RepResult run_one_replication(const SimulationScenario& scenario, const MethodSpec& method,
                                     std::size_t rep, std::uint64_t seed, std::size_t threads = 1) {
  RepResult r;
  r.rep = rep;
  r.seed = seed;
  SimulationScenario sc = scenario;
  sc.seed = seed;
  auto [train, test] = generate(sc);
  r.oracle_mce = oracle_mce(scenario.id, test);
  if (method.kind == MethodKind::Population) {
    const auto fit = fit_population(train);
    r.c_hat = fit.c_hat;
    r.mce = mce(fit.c_hat, test);
    return r;
  }
  if (!is_personalized(scenario.id)) {
    throw Error(ErrorCode::BadParameter, "personalized methods need a scenario with covariates");
  }
  const auto fit = fit_personalized(train, method.kernel(), method, derive_seed(seed, 2), threads);
  r.lambda = fit.model.lambda;
  r.mce = mce(fit.model, test);
  const Vector c = fit.model.predict(covariate_matrix(test));
  double dev = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    dev += std::abs(c(static_cast<Eigen::Index>(i)) - oracle_threshold(scenario.id, test[i].z));
  }
  r.mean_abs_error = dev / static_cast<double>(test.size());
  return r;
}

/// Runs `reps` independent replications; replication k uses seed
/// derive_seed(base_seed, k). Failed replications are recorded, not thrown.
inline ReplicationReport run_replications(const SimulationScenario& scenario, const MethodSpec& method,
                                          std::size_t reps, std::uint64_t base_seed,
                                          std::size_t threads = 1) {
  scenario.check();
  if (reps == 0) throw Error(ErrorCode::BadParameter, "reps must be at least 1");
  const auto start = std::chrono::steady_clock::now();
  ReplicationReport report;
  report.scenario = scenario.id;
  report.method = method.kind;
  report.n_train = scenario.n_train;
  report.n_test = scenario.n_test;
  report.base_seed = base_seed;
  report.reps.resize(reps);
  parallel_for(reps, threads, [&](std::size_t k) {
    const std::uint64_t seed = derive_seed(base_seed, k);
    try {
      report.reps[k] = run_one_replication(scenario, method, k, seed);
    } catch (const std::exception& e) {
      report.reps[k].rep = k;
      report.reps[k].seed = seed;
      report.reps[k].error = e.what();
    }
  });

  std::vector<double> mces;
  std::vector<double> oracle;
  std::vector<double> chats;
  std::vector<double> abs_c_err;
  std::vector<double> dev;
  for (const auto& r : report.reps) {
    if (r.error) {
      ++report.failures;
      continue;
    }
    mces.push_back(r.mce);
    oracle.push_back(r.oracle_mce);
    if (r.c_hat) {
      chats.push_back(*r.c_hat);
      abs_c_err.push_back(std::abs(*r.c_hat - oracle_threshold(scenario.id)));
    }
    if (r.mean_abs_error) dev.push_back(*r.mean_abs_error);
  }
  std::tie(report.mean_mce, report.se_mce) = mean_and_se(mces);
  report.mean_oracle_mce = mean_and_se(oracle).first;
  if (!chats.empty()) {
    auto [m, se] = mean_and_se(chats);
    report.mean_c_hat = m;
    report.se_c_hat = se;
    auto mid = abs_c_err.begin() + static_cast<std::ptrdiff_t>(abs_c_err.size() / 2);
    std::nth_element(abs_c_err.begin(), mid, abs_c_err.end());
    double med = *mid;
    if (abs_c_err.size() % 2 == 0) med = 0.5 * (med + *std::max_element(abs_c_err.begin(), mid));
    report.median_abs_c_error = med;
  }
  if (!dev.empty()) report.mean_abs_error = mean_and_se(dev).first;
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

struct SensitivityRow {
  double delta = 0.0;
  double lambda = 0.0;
  double b = 0.0;
  std::vector<double> slope;  // linear kernel: sum_i w_i z_i
  double mce = 0.0;
  double mean_abs_error = 0.0;  // mean |c_hat(z) - c*(z)| over the test set
  std::size_t outer_iterations = 0;
};

inline std::vector<double> default_delta_grid() { return {0.01, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0}; }

/// One fixed Pers1 replication refitted at each delta with a linear kernel
/// and cross-validated lambda.
inline std::vector<SensitivityRow> delta_sensitivity(std::size_t n_train, const std::vector<double>& deltas,
                                                     std::uint64_t seed, std::size_t threads = 1,
                                                     std::size_t n_test = 2000,
                                                     const std::vector<double>& lambda_grid = default_lambda_grid(),
                                                     const DcaConfig& dca = {}) {
  if (deltas.empty()) throw Error(ErrorCode::BadParameter, "empty delta grid");
  for (double d : deltas) {
    if (!(d > 0.0)) throw Error(ErrorCode::BadParameter, "delta grid must be positive");
  }
  SimulationScenario sc{ScenarioId::Pers1, n_train, n_test, seed};
  auto [train, test] = generate(sc);
  const CovariateMatrix z_test = covariate_matrix(test);
  std::vector<SensitivityRow> rows;
  for (double delta : deltas) {
    MethodSpec method;
    method.kind = MethodKind::PersonalizedLinear;
    method.delta = delta;
    method.lambda_grid = lambda_grid;
    method.dca = dca;
    const auto fit = fit_personalized(train, method.kernel(), method, derive_seed(seed, 2), threads);
    SensitivityRow row;
    row.delta = delta;
    row.lambda = fit.model.lambda;
    row.b = fit.model.b;
    const Vector slope = fit.model.anchors.transpose() * fit.model.w;
    row.slope.assign(slope.data(), slope.data() + slope.size());
    row.mce = mce(fit.model, test);
    const Vector c = fit.model.predict(z_test);
    double dev = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      dev += std::abs(c(static_cast<Eigen::Index>(i)) - oracle_threshold(ScenarioId::Pers1, test[i].z));
    }
    row.mean_abs_error = dev / static_cast<double>(test.size());
    row.outer_iterations = fit.model.outer_iterations;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace mcid
