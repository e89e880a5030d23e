// mcid: command-line front end for the MCID estimation library.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mcid/mcid.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;
constexpr int kExitNumerical = 1;
constexpr int kExitInput = 2;

struct Common {
  bool json = false;
  std::string out;
  bool zero_one_labels = false;
  std::optional<std::size_t> threads;
};

struct InputFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

mcid::Dataset load_dataset(const std::string& path, const Common& common) {
  std::ifstream in(path);
  if (!in) throw InputFailure("cannot open '" + path + "'");
  try {
    return mcid::read_dataset(in, {common.zero_one_labels});
  } catch (const mcid::Error& e) {
    throw mcid::Error(e.code(), path + ": " + e.message());
  }
}

mcid::CsvTable load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputFailure("cannot open '" + path + "'");
  try {
    return mcid::read_table(in);
  } catch (const mcid::Error& e) {
    throw mcid::Error(e.code(), path + ": " + e.message());
  }
}

/// Destination for the command's main output: --out file or stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw InputFailure("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

ordered_json envelope(const std::string& command, ordered_json config, ordered_json result) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["config"] = std::move(config);
  j["result"] = std::move(result);
  return j;
}

ordered_json nullable(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json threshold_json(const mcid::ThresholdFit& fit) {
  ordered_json j;
  j["c_hat"] = fit.c_hat;
  j["empirical_risk"] = fit.empirical_risk;
  j["minimizer_set"] = fit.minimizer_set;
  j["mode"] = mcid::to_string(fit.mode);
  j["weight_w"] = fit.weight_w;
  if (fit.mode == mcid::ThresholdMode::NeymanPearson) j["alpha"] = fit.alpha;
  j["type1_error"] = fit.type1_error;
  j["type2_error"] = fit.type2_error;
  j["n"] = fit.n;
  return j;
}

void print_threshold(std::ostream& os, const mcid::ThresholdFit& fit) {
  os << "c_hat: " << mcid::format_double(fit.c_hat) << '\n'
     << "empirical_risk: " << mcid::format_double(fit.empirical_risk) << '\n'
     << "minimizers: " << fit.minimizer_set.size() << " in [" << mcid::format_double(fit.minimizer_set.front())
     << ", " << mcid::format_double(fit.minimizer_set.back()) << "]\n"
     << "type1_error: " << mcid::format_double(fit.type1_error) << '\n'
     << "type2_error: " << mcid::format_double(fit.type2_error) << '\n'
     << "n: " << fit.n << '\n';
}

void emit_threshold(const Common& common, const std::string& command, ordered_json config,
                    const mcid::ThresholdFit& fit) {
  Output out(common.out);
  if (common.json) {
    out.stream() << envelope(command, std::move(config), threshold_json(fit)).dump(2) << '\n';
  } else {
    print_threshold(out.stream(), fit);
  }
}

mcid::KernelSpec parse_kernel(const std::string& kernel, const std::string& sigma2) {
  if (kernel == "linear") {
    if (!sigma2.empty() && sigma2 != "median") {
      throw mcid::Error(mcid::ErrorCode::BadParameter, "--sigma2 applies to the gaussian kernel only");
    }
    return mcid::KernelSpec::linear();
  }
  if (kernel != "gaussian") {
    throw mcid::Error(mcid::ErrorCode::BadParameter, "unknown kernel '" + kernel + "'");
  }
  if (sigma2.empty() || sigma2 == "median") return mcid::KernelSpec::gaussian_median();
  if (sigma2 == "median-squared") {
    return mcid::KernelSpec::gaussian_median(mcid::BandwidthRule::MedianSquaredDistance);
  }
  const auto v = mcid::parse_double(sigma2);
  if (!v) throw mcid::Error(mcid::ErrorCode::BadParameter, "--sigma2 must be a number or 'median'");
  return mcid::KernelSpec::gaussian(*v);
}

std::optional<double> parse_lambda(const std::string& s) {
  if (s == "cv") return std::nullopt;
  const auto v = mcid::parse_double(s);
  if (!v || !(*v > 0.0)) {
    throw mcid::Error(mcid::ErrorCode::BadParameter, "--lambda must be a positive number or 'cv'");
  }
  return v;
}

ordered_json kernel_json(const mcid::KernelSpec& k) {
  ordered_json j;
  j["kind"] = k.name();
  if (k.kind == mcid::KernelKind::Gaussian) {
    j["sigma2"] = nullable(k.sigma2);
    j["bandwidth_rule"] =
        k.rule == mcid::BandwidthRule::MedianDistance ? "median-distance" : "median-squared-distance";
  }
  return j;
}

ordered_json dca_json(const mcid::DcaConfig& c) {
  ordered_json j;
  j["max_outer_iters"] = c.max_outer_iters;
  j["outer_tol"] = c.outer_tol;
  j["inner_tolerance"] = c.inner.tolerance;
  j["inner_max_iters"] = c.inner.max_iters;
  j["init"] = c.init == mcid::InitPolicy::ConvexRelaxation      ? "convex-relaxation"
              : c.init == mcid::InitPolicy::PopulationThreshold ? "population-threshold"
                                                                 : "zero";
  j["warm_start"] = c.warm_start;
  return j;
}

ordered_json cv_json(const mcid::CvResult& cv) {
  ordered_json j;
  j["best_lambda"] = cv.best_lambda;
  ordered_json table = ordered_json::array();
  for (const auto& row : cv.table) {
    table.push_back({{"lambda", row.lambda}, {"mean_mce", row.mean_mce}, {"fold_mce", row.fold_mce}});
  }
  j["table"] = std::move(table);
  return j;
}

// ---- subcommands ---------------------------------------------------------

struct PopulationArgs {
  std::string csv;
  double w = 0.5;
  double alpha = 0.05;
};

int run_fit_population(const Common& common, const PopulationArgs& a) {
  const auto data = load_dataset(a.csv, common);
  ordered_json config{{"input", a.csv}, {"zero_one_labels", common.zero_one_labels}};
  emit_threshold(common, "fit-population", std::move(config), mcid::fit_population(data));
  return 0;
}

int run_fit_weighted(const Common& common, const PopulationArgs& a) {
  const auto data = load_dataset(a.csv, common);
  ordered_json config{{"input", a.csv}, {"w", a.w}, {"zero_one_labels", common.zero_one_labels}};
  emit_threshold(common, "fit-weighted", std::move(config), mcid::fit_weighted(data, a.w));
  return 0;
}

int run_fit_np(const Common& common, const PopulationArgs& a) {
  const auto data = load_dataset(a.csv, common);
  ordered_json config{{"input", a.csv}, {"alpha", a.alpha}, {"zero_one_labels", common.zero_one_labels}};
  emit_threshold(common, "fit-np", std::move(config), mcid::fit_neyman_pearson(data, a.alpha));
  return 0;
}

struct PersonalizedArgs {
  std::string csv;
  std::string kernel = "linear";
  std::string sigma2;
  double delta = 0.1;
  std::string lambda = "cv";
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  std::string model_out;
};

int run_fit_personalized(const Common& common, const PersonalizedArgs& a) {
  const auto data = load_dataset(a.csv, common);
  mcid::MethodSpec method;
  method.kind = mcid::MethodKind::PersonalizedLinear;
  method.delta = a.delta;
  method.lambda = parse_lambda(a.lambda);
  method.folds = a.folds;
  if (!(a.delta > 0.0)) throw mcid::Error(mcid::ErrorCode::BadParameter, "--delta must be positive");
  const auto kernel = parse_kernel(a.kernel, a.sigma2);
  mcid::require_valid(data);
  if (data.covariate_dim() == 0) {
    throw mcid::Error(mcid::ErrorCode::DimensionMismatch, "personalized fit needs covariate columns z1..zp");
  }
  const auto fit = mcid::fit_personalized(data, kernel, method, a.seed, common.threads.value_or(1));
  const auto& model = fit.model;

  if (!a.model_out.empty()) {
    std::ofstream mf(a.model_out);
    if (!mf) throw InputFailure("cannot write '" + a.model_out + "'");
    mcid::save_model(model, mf);
  }

  ordered_json config{{"input", a.csv},
                      {"kernel", kernel_json(model.kernel)},
                      {"delta", a.delta},
                      {"lambda", a.lambda},
                      {"folds", a.folds},
                      {"seed", a.seed},
                      {"threads", common.threads.value_or(1)},
                      {"model_out", a.model_out},
                      {"zero_one_labels", common.zero_one_labels},
                      {"dca", dca_json(method.dca)}};
  ordered_json result;
  result["lambda"] = model.lambda;
  result["b"] = model.b;
  result["objective"] = model.trace.empty() ? ordered_json(nullptr) : ordered_json(model.trace.back());
  result["objective_trace"] = model.trace;
  result["outer_iterations"] = model.outer_iterations;
  result["inner_iterations"] = model.inner_iterations;
  result["inner_failures"] = model.inner_failures;
  result["converged"] = model.converged;
  result["training_mce"] = mcid::mce(model, data);
  if (model.kernel.kind == mcid::KernelKind::Linear) {
    const mcid::Vector slope = model.anchors.transpose() * model.w;
    result["slope"] = std::vector<double>(slope.data(), slope.data() + slope.size());
  }
  if (fit.cv) result["cv"] = cv_json(*fit.cv);

  Output out(common.out);
  if (common.json) {
    out.stream() << envelope("fit-personalized", std::move(config), std::move(result)).dump(2) << '\n';
  } else {
    auto& os = out.stream();
    os << "kernel: " << model.kernel.name();
    if (model.kernel.sigma2) os << " (sigma2 " << mcid::format_double(*model.kernel.sigma2) << ")";
    os << '\n'
       << "delta: " << mcid::format_double(a.delta) << '\n'
       << "lambda: " << mcid::format_double(model.lambda) << (fit.cv ? " (cv)" : "") << '\n'
       << "b: " << mcid::format_double(model.b) << '\n'
       << "objective: " << mcid::format_double(model.trace.back()) << '\n'
       << "outer_iterations: " << model.outer_iterations << '\n'
       << "converged: " << (model.converged ? "yes" : "no") << '\n'
       << "training_mce: " << mcid::format_double(result["training_mce"].get<double>()) << '\n';
    if (!a.model_out.empty()) os << "model: " << a.model_out << '\n';
  }
  return 0;
}

struct PredictArgs {
  std::string model;
  std::string csv;
};

int run_predict(const Common& common, const PredictArgs& a) {
  std::ifstream mf(a.model);
  if (!mf) throw InputFailure("cannot open '" + a.model + "'");
  mcid::PersonalizedModel model;
  try {
    model = mcid::load_model(mf);
  } catch (const mcid::Error& e) {
    throw mcid::Error(e.code(), a.model + ": " + e.message());
  }
  const auto table = load_table(a.csv);
  const auto x_col = table.column("x");
  std::size_t first_z = 0;
  if (x_col) {
    if (*x_col != 0) throw mcid::Error(mcid::ErrorCode::ParseError, a.csv + ": line 1: x must be the first column");
    first_z = table.column("y") == std::size_t{1} ? 2 : 1;
  }
  const std::size_t p = mcid::covariate_columns(table, first_z);
  if (p != model.covariate_dim()) {
    throw mcid::Error(mcid::ErrorCode::DimensionMismatch,
                      a.csv + ": has " + std::to_string(p) + " covariate columns, model expects " +
                          std::to_string(model.covariate_dim()));
  }
  mcid::CovariateMatrix z(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(p));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t k = 0; k < p; ++k) {
      const double v = table.rows[r][first_z + k];
      if (!std::isfinite(v)) {
        throw mcid::Error(mcid::ErrorCode::NonFiniteValue,
                          a.csv + ": line " + std::to_string(table.lines[r]) + ": non-finite covariate");
      }
      z(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = v;
    }
  }
  const mcid::Vector c = model.predict(z);

  Output out(common.out);
  auto& os = out.stream();
  if (common.json) {
    ordered_json rows = ordered_json::array();
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      ordered_json row{{"row", r + 1}, {"c_hat", c(static_cast<Eigen::Index>(r))}};
      if (x_col) row["label"] = mcid::sign_pos(table.rows[r][0] - c(static_cast<Eigen::Index>(r)));
      rows.push_back(std::move(row));
    }
    ordered_json config{{"model", a.model}, {"input", a.csv}};
    os << envelope("predict", std::move(config), {{"predictions", std::move(rows)}}).dump(2) << '\n';
  } else {
    os << "row,c_hat" << (x_col ? ",label" : "") << '\n';
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      os << r + 1 << ',' << mcid::format_double(c(static_cast<Eigen::Index>(r)));
      if (x_col) os << ',' << mcid::sign_pos(table.rows[r][0] - c(static_cast<Eigen::Index>(r)));
      os << '\n';
    }
  }
  return 0;
}

struct SimulateArgs {
  std::string scenario = "pop1";
  std::size_t n = 500;
  std::size_t n_test = 2000;
  std::size_t reps = 100;
  std::string method = "population";
  double delta = 0.1;
  std::string lambda = "cv";
  std::size_t folds = 5;
  std::uint64_t seed = 0;
};

int run_simulate(const Common& common, const SimulateArgs& a) {
  const auto id = mcid::parse_scenario(a.scenario);
  mcid::MethodSpec method;
  method.kind = mcid::parse_method(a.method);
  method.delta = a.delta;
  method.lambda = parse_lambda(a.lambda);
  method.folds = a.folds;
  if (!(a.delta > 0.0)) throw mcid::Error(mcid::ErrorCode::BadParameter, "--delta must be positive");
  if (method.kind != mcid::MethodKind::Population && !mcid::is_personalized(id)) {
    throw mcid::Error(mcid::ErrorCode::BadParameter,
                      "scenario " + a.scenario + " has no covariates; use --method population");
  }
  const std::size_t threads = common.threads.value_or(mcid::default_threads());
  const mcid::SimulationScenario sc{id, a.n, a.n_test, a.seed};
  const auto report = mcid::run_replications(sc, method, a.reps, a.seed, threads);

  ordered_json config{{"scenario", a.scenario}, {"n_train", a.n},   {"n_test", a.n_test},
                      {"reps", a.reps},         {"method", a.method}, {"seed", a.seed},
                      {"threads", threads}};
  if (method.kind != mcid::MethodKind::Population) {
    config["delta"] = a.delta;
    config["lambda"] = a.lambda;
    config["folds"] = a.folds;
    config["kernel"] = kernel_json(method.kernel());
    config["dca"] = dca_json(method.dca);
  }
  ordered_json result;
  result["mean_mce"] = report.mean_mce;
  result["se_mce"] = nullable(report.se_mce);
  result["mean_oracle_mce"] = report.mean_oracle_mce;
  result["mean_c_hat"] = nullable(report.mean_c_hat);
  result["se_c_hat"] = nullable(report.se_c_hat);
  result["median_abs_c_error"] = nullable(report.median_abs_c_error);
  result["mean_abs_error"] = nullable(report.mean_abs_error);
  result["failures"] = report.failures;
  result["runtime_seconds"] = report.runtime_seconds;
  ordered_json reps = ordered_json::array();
  for (const auto& r : report.reps) {
    ordered_json rj{{"rep", r.rep}, {"seed", r.seed}};
    if (r.error) {
      rj["error"] = *r.error;
    } else {
      rj["mce"] = r.mce;
      rj["oracle_mce"] = r.oracle_mce;
      if (r.c_hat) rj["c_hat"] = *r.c_hat;
      if (r.lambda) rj["lambda"] = *r.lambda;
      if (r.mean_abs_error) rj["mean_abs_error"] = *r.mean_abs_error;
    }
    reps.push_back(std::move(rj));
  }
  result["reps"] = std::move(reps);

  Output out(common.out);
  auto& os = out.stream();
  if (common.json) {
    os << envelope("simulate", std::move(config), std::move(result)).dump(2) << '\n';
  } else {
    auto se = [](const std::optional<double>& v) {
      return v ? " (" + mcid::format_double(*v) + ")" : std::string();
    };
    os << "scenario: " << a.scenario << "  method: " << a.method << "  n: " << a.n << "  reps: " << a.reps
       << '\n'
       << "mean MCE: " << mcid::format_double(report.mean_mce) << se(report.se_mce) << '\n'
       << "oracle MCE: " << mcid::format_double(report.mean_oracle_mce) << '\n';
    if (report.mean_c_hat) {
      os << "mean c_hat: " << mcid::format_double(*report.mean_c_hat) << se(report.se_c_hat) << '\n';
    }
    if (report.mean_abs_error) {
      os << "mean |c_hat(z) - c*(z)|: " << mcid::format_double(*report.mean_abs_error) << '\n';
    }
    os << "failures: " << report.failures << '\n'
       << "runtime: " << mcid::format_double(report.runtime_seconds) << " s\n";
  }
  return report.failures == a.reps ? kExitNumerical : 0;
}

struct SensitivityArgs {
  std::size_t n = 250;
  std::size_t n_test = 2000;
  std::uint64_t seed = 0;
  std::vector<double> deltas = mcid::default_delta_grid();
};

int run_sensitivity(const Common& common, const SensitivityArgs& a) {
  const std::size_t threads = common.threads.value_or(1);
  const auto rows = mcid::delta_sensitivity(a.n, a.deltas, a.seed, threads, a.n_test);
  Output out(common.out);
  auto& os = out.stream();
  if (common.json) {
    ordered_json table = ordered_json::array();
    for (const auto& r : rows) {
      table.push_back({{"delta", r.delta},
                       {"lambda", r.lambda},
                       {"b", r.b},
                       {"slope", r.slope},
                       {"mce", r.mce},
                       {"mean_abs_error", r.mean_abs_error},
                       {"outer_iterations", r.outer_iterations}});
    }
    ordered_json config{{"scenario", "pers1"}, {"kernel", "linear"}, {"n_train", a.n},
                        {"n_test", a.n_test},  {"seed", a.seed},     {"deltas", a.deltas},
                        {"threads", threads}};
    os << envelope("sensitivity-delta", std::move(config), {{"rows", std::move(table)}}).dump(2) << '\n';
  } else {
    os << "delta,lambda,b,slope1,slope2,mce,mean_abs_error\n";
    for (const auto& r : rows) {
      os << mcid::format_double(r.delta) << ',' << mcid::format_double(r.lambda) << ','
         << mcid::format_double(r.b);
      for (double s : r.slope) os << ',' << mcid::format_double(s);
      os << ',' << mcid::format_double(r.mce) << ',' << mcid::format_double(r.mean_abs_error) << '\n';
    }
  }
  return 0;
}

int run_demo(const Common& common) {
  const auto spec = mcid::counterexample_population();
  const double c_star = mcid::ideal_mcid(spec);
  const std::vector<mcid::LossKind> losses = {mcid::LossKind::hinge(), mcid::LossKind::logistic(),
                                              mcid::LossKind::psi(), mcid::LossKind::psi_delta(0.1),
                                              mcid::LossKind::psi_delta(0.01)};
  struct Row {
    std::string loss;
    double minimizer;
  };
  std::vector<Row> rows;
  for (const auto& loss : losses) rows.push_back({loss.name(), mcid::surrogate_minimizer(loss, spec)});

  Output out(common.out);
  auto& os = out.stream();
  if (common.json) {
    ordered_json table = ordered_json::array();
    for (const auto& r : rows) {
      table.push_back({{"loss", r.loss}, {"minimizer", r.minimizer}, {"gap", r.minimizer - c_star}});
    }
    ordered_json config{{"population", "uniform(-3,3)"}};
    os << envelope("demo-inconsistency", std::move(config), {{"c_star", c_star}, {"rows", std::move(table)}})
              .dump(2)
       << '\n';
  } else {
    os << "loss,minimizer,gap\n";
    for (const auto& r : rows) {
      os << r.loss << ',' << mcid::format_double(r.minimizer) << ',' << mcid::format_double(r.minimizer - c_star)
         << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimum clinically important difference estimation"};
  app.require_subcommand(1);
  Common common;
  app.add_flag("--json", common.json, "Print a JSON report on stdout");
  app.add_option("--out", common.out, "Write output to this file instead of stdout");
  app.add_flag("--zero-one-labels", common.zero_one_labels, "Read y in {0,1} instead of {-1,1}");
  app.add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);

  PopulationArgs pop;
  auto* fp = app.add_subcommand("fit-population", "Population MCID by exact 0-1 risk minimization");
  fp->add_option("csv", pop.csv, "Input CSV (x,y)")->required();

  auto* fw = app.add_subcommand("fit-weighted", "Weighted population MCID");
  fw->add_option("csv", pop.csv, "Input CSV (x,y)")->required();
  fw->add_option("--w", pop.w, "Weight of the positive class, in (0,1)")->required();

  auto* fn = app.add_subcommand("fit-np", "Neyman-Pearson threshold");
  fn->add_option("csv", pop.csv, "Input CSV (x,y)")->required();
  fn->add_option("--alpha", pop.alpha, "Type-I error cap, in (0,1)")->required();

  PersonalizedArgs pers;
  auto* fpz = app.add_subcommand("fit-personalized", "Personalized MCID via kernel DCA");
  fpz->add_option("csv", pers.csv, "Input CSV (x,y,z1..zp)")->required();
  fpz->add_option("--kernel", pers.kernel, "linear or gaussian")
      ->check(CLI::IsMember({"linear", "gaussian"}))
      ->capture_default_str();
  fpz->add_option("--sigma2", pers.sigma2, "Gaussian scale: a number, median, or median-squared");
  fpz->add_option("--delta", pers.delta, "psi_delta margin")->capture_default_str();
  fpz->add_option("--lambda", pers.lambda, "Penalty, or cv to cross-validate")->capture_default_str();
  fpz->add_option("--folds", pers.folds, "Cross-validation folds")->capture_default_str();
  fpz->add_option("--seed", pers.seed, "Fold assignment seed")->capture_default_str();
  fpz->add_option("--model-out", pers.model_out, "Write the fitted model here");

  PredictArgs pred;
  auto* pr = app.add_subcommand("predict", "Evaluate a saved personalized model");
  pr->add_option("--model", pred.model, "Model file")->required();
  pr->add_option("csv", pred.csv, "CSV with z1..zp (optionally x, or x,y, first)")->required();

  SimulateArgs sim;
  auto* sm = app.add_subcommand("simulate", "Monte Carlo replications of a synthetic scenario");
  sm->add_option("--scenario", sim.scenario, "pop1, pop2, pers1, pers2 or pers3")->capture_default_str();
  sm->add_option("--n", sim.n, "Training size")->capture_default_str();
  sm->add_option("--n-test", sim.n_test, "Test size")->capture_default_str();
  sm->add_option("--reps", sim.reps, "Replications")->capture_default_str();
  sm->add_option("--method", sim.method, "population, personalized-linear or personalized-gaussian")
      ->capture_default_str();
  sm->add_option("--delta", sim.delta, "psi_delta margin")->capture_default_str();
  sm->add_option("--lambda", sim.lambda, "Penalty, or cv")->capture_default_str();
  sm->add_option("--folds", sim.folds, "Cross-validation folds")->capture_default_str();
  sm->add_option("--seed", sim.seed, "Base seed")->capture_default_str();

  SensitivityArgs sens;
  auto* sd = app.add_subcommand("sensitivity-delta", "Refit one Pers1 replication across delta");
  sd->add_option("--n", sens.n, "Training size")->capture_default_str();
  sd->add_option("--n-test", sens.n_test, "Test size")->capture_default_str();
  sd->add_option("--seed", sens.seed, "Seed")->capture_default_str();
  sd->add_option("--deltas", sens.deltas, "Delta grid")->delimiter(',');

  auto* demo = app.add_subcommand("demo-inconsistency", "Surrogate minimizers on the counterexample population");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (fp->parsed()) return run_fit_population(common, pop);
    if (fw->parsed()) return run_fit_weighted(common, pop);
    if (fn->parsed()) return run_fit_np(common, pop);
    if (fpz->parsed()) return run_fit_personalized(common, pers);
    if (pr->parsed()) return run_predict(common, pred);
    if (sm->parsed()) return run_simulate(common, sim);
    if (sd->parsed()) return run_sensitivity(common, sens);
    if (demo->parsed()) return run_demo(common);
  } catch (const mcid::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return mcid::is_input_error(e.code()) ? kExitInput : kExitNumerical;
  } catch (const InputFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitInput;
}
