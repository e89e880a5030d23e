#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "mcid/data.hpp"
#include "mcid/error.hpp"
#include "mcid/format.hpp"
#include "mcid/inner_solver.hpp"
#include "mcid/kernels.hpp"
#include "mcid/losses.hpp"
#include "mcid/population.hpp"

namespace mcid {

enum class InitPolicy {
  ConvexRelaxation,     // minimizer of the convex part s1 alone
  PopulationThreshold,  // b = covariate-free MCID of the training set, w = 0
  Zero,                 // b = 0, w = 0
};

/// Summary handed to DcaConfig::observer after every fit.
struct DcaTrace {
  std::span<const double> objective;  // s(b_k, w_k), k = 0..outer iterations
  std::size_t outer_iterations = 0;
  std::size_t inner_iterations = 0;
  std::size_t inner_failures = 0;
  bool converged = false;
};

struct DcaConfig {
  std::size_t max_outer_iters = 50;
  double outer_tol = 1e-5;  // stop once the objective drops by less than this
  InnerConfig inner;
  InitPolicy init = InitPolicy::ConvexRelaxation;
  bool warm_start = true;
  /// Increases of the objective up to this much are attributed to inner
  /// solver slack (on top of the certified duality gap).
  double increase_slack = 1e-10;
  std::function<void(const DcaTrace&)> observer;

  void check() const {
    if (max_outer_iters == 0 || !(outer_tol > 0.0) || !(inner.tolerance > 0.0) ||
        inner.max_iters == 0) {
      throw Error(ErrorCode::BadParameter, "DCA tolerances and iteration limits must be positive");
    }
  }
};

/// Raw DCA output in representer form over a fixed Gram matrix.
struct DcaSolution {
  double b = 0.0;
  Vector w;
  std::vector<double> trace;
  std::size_t outer_iterations = 0;
  std::size_t inner_iterations = 0;
  std::size_t inner_failures = 0;
  bool converged = false;
};

/// Regularized psi_delta empirical risk of c_i = b + (Kw)_i.
inline double psi_delta_objective(std::span<const double> x, std::span<const int> y, double b,
                                  const Vector& Kw, double wKw, double delta, double lambda) {
  const auto loss = LossKind::psi_delta(delta);
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    total += loss_value(loss, y[i] * (x[i] - b - Kw(static_cast<Eigen::Index>(i))));
  }
  return total / static_cast<double>(x.size()) + 0.5 * lambda * wKw;
}

/// Pieces of the DC split s = s1 - s2 over a fixed Gram matrix, exposed for
/// diagnostics and tests.
struct DcSplit {
  const Matrix* K = nullptr;
  std::span<const double> x;
  std::span<const int> y;
  double delta = 0.1;
  double lambda = 1.0;

  std::size_t size() const noexcept { return x.size(); }

  double s1(double b, const Vector& w) const {
    const Vector Kw = *K * w;
    double total = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      total += psi_delta_dc_parts(delta, y[i] * (x[i] - b - Kw(static_cast<Eigen::Index>(i)))).first;
    }
    return total / static_cast<double>(size()) + 0.5 * lambda * w.dot(Kw);
  }

  double s2(double b, const Vector& w) const {
    const Vector Kw = *K * w;
    double total = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      total += psi_delta_dc_parts(delta, y[i] * (x[i] - b - Kw(static_cast<Eigen::Index>(i)))).second;
    }
    return total / static_cast<double>(size());
  }

  double s(double b, const Vector& w) const { return s1(b, w) - s2(b, w); }

  /// Subgradient of s2 at (b, w) in representer form: the b-component and
  /// coefficients v with w-component K v. Margins exactly 0 contribute 0.
  LinearTerm s2_subgradient(double b, const Vector& w) const {
    const Vector Kw = *K * w;
    const double box = 1.0 / (static_cast<double>(size()) * delta);
    LinearTerm lin{0.0, Vector::Zero(static_cast<Eigen::Index>(size()))};
    for (std::size_t i = 0; i < size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      if (y[i] * (x[i] - b - Kw(ii)) < 0.0) {
        lin.v(ii) = box * y[i];
        lin.b += box * y[i];
      }
    }
    return lin;
  }

  /// Convex majorant of s built at (b0, w0), evaluated at (b, w).
  double surrogate(double b, const Vector& w, double b0, const Vector& w0) const {
    const LinearTerm g = s2_subgradient(b0, w0);
    const Vector Kg = *K * g.v;
    return s1(b, w) - s2(b0, w0) - (g.b * (b - b0) + Kg.dot(w - w0));
  }
};

/// DCA on a precomputed Gram matrix, starting from (b0, 0).
inline DcaSolution dca_fit_gram(const Matrix& K, std::span<const double> x, std::span<const int> y,
                                double delta, double lambda, const DcaConfig& config, double b0) {
  config.check();
  if (!(delta > 0.0) || !(lambda > 0.0)) {
    throw Error(ErrorCode::BadParameter, "delta and lambda must be positive");
  }
  const std::size_t n = x.size();
  const auto N = static_cast<Eigen::Index>(n);
  if (K.rows() != N || K.cols() != N || y.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "Gram matrix does not match the training set");
  }
  const double box = 1.0 / (static_cast<double>(n) * delta);
  InnerProblem prob{&K, x, y, delta, lambda};

  DcaSolution sol;
  sol.b = b0;
  sol.w = Vector::Zero(N);
  Vector Kw = Vector::Zero(N);
  Vector alpha_prev;
  std::vector<char> active_prev;
  if (config.init == InitPolicy::ConvexRelaxation) {
    InnerSolution relaxed = solve_inner(prob, LinearTerm{0.0, Vector::Zero(N)}, config.inner);
    sol.inner_iterations += relaxed.iterations;
    if (relaxed.status != InnerStatus::Converged) ++sol.inner_failures;
    sol.b = relaxed.b;
    sol.w = relaxed.w;
    Kw = K * sol.w;
    alpha_prev = std::move(relaxed.alpha);
    active_prev.assign(n, 0);
  }
  double s_cur = psi_delta_objective(x, y, sol.b, Kw, sol.w.dot(Kw), delta, lambda);
  sol.trace.push_back(s_cur);

  for (std::size_t k = 0; k < config.max_outer_iters; ++k) {
    LinearTerm lin{0.0, Vector::Zero(N)};
    std::vector<char> active(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      if (y[i] * (x[i] - sol.b - Kw(ii)) < 0.0) {
        active[i] = 1;
        lin.v(ii) = box * y[i];
        lin.b += box * y[i];
      }
    }

    Vector warm;
    const Vector* warm_ptr = nullptr;
    if (config.warm_start && alpha_prev.size() == N) {
      // keep w fixed across the change of linear term: a o y = v - lambda w
      warm = alpha_prev;
      for (std::size_t i = 0; i < n; ++i) {
        warm(static_cast<Eigen::Index>(i)) += box * (active[i] - active_prev[i]);
      }
      warm_ptr = &warm;
    }
    InnerSolution inner = solve_inner(prob, lin, config.inner, warm_ptr);
    sol.inner_iterations += inner.iterations;
    if (inner.status != InnerStatus::Converged) ++sol.inner_failures;
    ++sol.outer_iterations;

    const Vector Kw_new = K * inner.w;
    const double s_new =
        psi_delta_objective(x, y, inner.b, Kw_new, inner.w.dot(Kw_new), delta, lambda);
    if (s_new > s_cur) {
      // s_new - s_cur is bounded by the subproblem's optimality gap
      const double allowed = std::max(inner.gap, 0.0) + config.increase_slack +
                             1e-12 * std::max(1.0, std::abs(s_cur));
      if (s_new - s_cur > allowed) {
        throw Error(ErrorCode::NonDecreasingObjective,
                    "objective rose from " + format_double(s_cur) + " to " + format_double(s_new));
      }
      sol.converged = true;
      break;
    }
    const double decrease = s_cur - s_new;
    sol.b = inner.b;
    sol.w = inner.w;
    Kw = Kw_new;
    s_cur = s_new;
    sol.trace.push_back(s_cur);
    alpha_prev = std::move(inner.alpha);
    active_prev = std::move(active);
    if (decrease < config.outer_tol) {
      sol.converged = true;
      break;
    }
  }

  if (config.observer) {
    config.observer(DcaTrace{sol.trace, sol.outer_iterations, sol.inner_iterations,
                             sol.inner_failures, sol.converged});
  }
  return sol;
}

/// c(z) = b + sum_i w_i K(anchor_i, z).
struct PersonalizedModel {
  double b = 0.0;
  Vector w;
  CovariateMatrix anchors;
  KernelSpec kernel;  // resolved
  double delta = 0.1;
  double lambda = 1.0;
  std::vector<double> trace;
  std::size_t outer_iterations = 0;
  std::size_t inner_iterations = 0;
  std::size_t inner_failures = 0;
  bool converged = false;

  std::size_t covariate_dim() const noexcept { return static_cast<std::size_t>(anchors.cols()); }

  double predict(std::span<const double> z) const {
    if (z.size() != covariate_dim()) {
      throw Error(ErrorCode::DimensionMismatch, "covariate vector has " + std::to_string(z.size()) +
                                                    " entries, model expects " +
                                                    std::to_string(covariate_dim()));
    }
    double c = b;
    for (Eigen::Index i = 0; i < anchors.rows(); ++i) c += w(i) * eval(kernel, row_span(anchors, i), z);
    return c;
  }

  Vector predict(const CovariateMatrix& z) const {
    if (static_cast<std::size_t>(z.cols()) != covariate_dim()) {
      throw Error(ErrorCode::DimensionMismatch, "covariate width does not match the model");
    }
    // per-row evaluation keeps results bitwise equal to predict(span)
    Vector out(z.rows());
    for (Eigen::Index i = 0; i < z.rows(); ++i) out(i) = predict(row_span(z, i));
    return out;
  }
};

namespace detail {

inline void require_personalized_input(const Dataset& train) {
  if (train.empty()) throw Error(ErrorCode::EmptyDataset, "training set is empty");
  require_valid(train);
}

inline double initial_offset(const Dataset& train, InitPolicy policy) {
  return policy == InitPolicy::PopulationThreshold ? fit_population(train).c_hat : 0.0;
}

}  // namespace detail

/// Fits c(z) by minimizing the regularized psi_delta risk with DCA, over a
/// Gram matrix already built for `train`'s covariates.
inline PersonalizedModel dca_fit(const Dataset& train, const KernelMatrix& gram_matrix, double delta,
                                 double lambda, const DcaConfig& config = {}) {
  detail::require_personalized_input(train);
  if (static_cast<std::size_t>(gram_matrix.K.rows()) != train.size()) {
    throw Error(ErrorCode::DimensionMismatch, "Gram matrix does not match the training set");
  }
  std::vector<double> x;
  std::vector<int> y;
  x.reserve(train.size());
  y.reserve(train.size());
  for (const auto& s : train) {
    x.push_back(s.x);
    y.push_back(s.y);
  }
  DcaSolution sol = dca_fit_gram(gram_matrix.K, x, y, delta, lambda, config,
                                 detail::initial_offset(train, config.init));
  PersonalizedModel model;
  model.b = sol.b;
  model.w = std::move(sol.w);
  model.anchors = gram_matrix.anchors;
  model.kernel = gram_matrix.spec;
  model.delta = delta;
  model.lambda = lambda;
  model.trace = std::move(sol.trace);
  model.outer_iterations = sol.outer_iterations;
  model.inner_iterations = sol.inner_iterations;
  model.inner_failures = sol.inner_failures;
  model.converged = sol.converged;
  return model;
}

inline PersonalizedModel dca_fit(const Dataset& train, const KernelSpec& kernel, double delta,
                                 double lambda, const DcaConfig& config = {}) {
  detail::require_personalized_input(train);
  return dca_fit(train, gram(kernel, covariate_matrix(train)), delta, lambda, config);
}

/// (1/n) sum L_delta(y_i (x_i - c(z_i))) + (lambda/2) w'Kw over the model's
/// anchors; the offset b is not penalized.
inline double objective(const PersonalizedModel& model, const Dataset& train) {
  if (train.empty()) throw Error(ErrorCode::EmptyDataset, "no samples");
  if (train.covariate_dim() != model.covariate_dim() ||
      static_cast<Eigen::Index>(model.w.size()) != model.anchors.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "model and data dimensions disagree");
  }
  const auto loss = LossKind::psi_delta(model.delta);
  double total = 0.0;
  for (const auto& s : train) total += loss_value(loss, s.y * (s.x - model.predict(s.z)));
  const Matrix K = gram(model.kernel, model.anchors).K;
  return total / static_cast<double>(train.size()) + 0.5 * model.lambda * model.w.dot(K * model.w);
}

// Model file: line-oriented text, numbers in shortest round-trip form.
//
//   mcid-personalized-model 1
//   kernel linear|gaussian
//   sigma2 <value>                (gaussian only)
//   delta <value>
//   lambda <value>
//   b <value>
//   trace <k> <v_1> ... <v_k>
//   anchors <n> <p>
//   <w_i> <z_i1> ... <z_ip>       (n lines)

inline constexpr int kModelFormatVersion = 1;

inline void save_model(const PersonalizedModel& model, std::ostream& out) {
  out << "mcid-personalized-model " << kModelFormatVersion << '\n';
  out << "kernel " << model.kernel.name() << '\n';
  if (model.kernel.kind == KernelKind::Gaussian) out << "sigma2 " << format_double(*model.kernel.sigma2) << '\n';
  out << "delta " << format_double(model.delta) << '\n';
  out << "lambda " << format_double(model.lambda) << '\n';
  out << "b " << format_double(model.b) << '\n';
  out << "trace " << model.trace.size();
  for (double v : model.trace) out << ' ' << format_double(v);
  out << '\n';
  out << "anchors " << model.anchors.rows() << ' ' << model.anchors.cols() << '\n';
  for (Eigen::Index i = 0; i < model.anchors.rows(); ++i) {
    out << format_double(model.w(i));
    for (Eigen::Index k = 0; k < model.anchors.cols(); ++k) out << ' ' << format_double(model.anchors(i, k));
    out << '\n';
  }
}

inline PersonalizedModel load_model(std::istream& in) {
  std::size_t line_no = 0;
  std::string line;
  auto fail = [&](const std::string& msg) -> Error {
    return Error(ErrorCode::ParseError, "model file line " + std::to_string(line_no) + ": " + msg);
  };
  auto next_fields = [&](std::string_view key) {
    if (!std::getline(in, line)) throw fail("unexpected end of file, expected '" + std::string(key) + "'");
    ++line_no;
    std::istringstream ss(line);
    std::vector<std::string> fields;
    for (std::string f; ss >> f;) fields.push_back(f);
    if (!key.empty() && (fields.empty() || fields.front() != key)) {
      throw fail("expected '" + std::string(key) + "'");
    }
    return fields;
  };
  auto number = [&](const std::string& s) {
    auto v = parse_double(s);
    if (!v) throw fail("bad number '" + s + "'");
    return *v;
  };
  auto count = [&](const std::string& s) {
    auto v = parse_int(s);
    if (!v || *v < 0) throw fail("bad count '" + s + "'");
    return static_cast<std::size_t>(*v);
  };

  auto header = next_fields("mcid-personalized-model");
  if (header.size() != 2 || header[1] != std::to_string(kModelFormatVersion)) {
    throw fail("unsupported model format version");
  }
  PersonalizedModel model;
  auto kernel = next_fields("kernel");
  if (kernel.size() != 2) throw fail("kernel line needs one value");
  if (kernel[1] == "linear") {
    model.kernel = KernelSpec::linear();
  } else if (kernel[1] == "gaussian") {
    auto s2 = next_fields("sigma2");
    if (s2.size() != 2) throw fail("sigma2 line needs one value");
    model.kernel = KernelSpec::gaussian(number(s2[1]));
  } else {
    throw fail("unknown kernel '" + kernel[1] + "'");
  }
  auto scalar = [&](std::string_view key) {
    auto f = next_fields(key);
    if (f.size() != 2) throw fail(std::string(key) + " line needs one value");
    return number(f[1]);
  };
  model.delta = scalar("delta");
  model.lambda = scalar("lambda");
  model.b = scalar("b");
  auto trace = next_fields("trace");
  if (trace.size() < 2 || trace.size() != 2 + count(trace[1])) throw fail("trace length mismatch");
  for (std::size_t k = 2; k < trace.size(); ++k) model.trace.push_back(number(trace[k]));
  auto dims = next_fields("anchors");
  if (dims.size() != 3) throw fail("anchors line needs n and p");
  const auto n = static_cast<Eigen::Index>(count(dims[1]));
  const auto p = static_cast<Eigen::Index>(count(dims[2]));
  model.w.resize(n);
  model.anchors.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto row = next_fields("");
    if (static_cast<Eigen::Index>(row.size()) != p + 1) throw fail("anchor row has wrong width");
    model.w(i) = number(row[0]);
    for (Eigen::Index k = 0; k < p; ++k) model.anchors(i, k) = number(row[static_cast<std::size_t>(k + 1)]);
  }
  model.outer_iterations = model.trace.empty() ? 0 : model.trace.size() - 1;
  model.converged = true;
  return model;
}

}  // namespace mcid
