#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcid/data.hpp"
#include "mcid/error.hpp"

namespace mcid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
/// Covariates, one patient per row.
using CovariateMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline CovariateMatrix covariate_matrix(const Dataset& data) {
  const std::size_t p = data.covariate_dim();
  CovariateMatrix z(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].z.size() != p) throw Error(ErrorCode::MixedCovariateDim, "row " + std::to_string(i));
    for (std::size_t k = 0; k < p; ++k) {
      z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = data[i].z[k];
    }
  }
  return z;
}

inline std::span<const double> row_span(const CovariateMatrix& z, Eigen::Index i) {
  return {z.data() + i * z.cols(), static_cast<std::size_t>(z.cols())};
}

enum class KernelKind { Linear, Gaussian };

/// How the Gaussian scale is derived from training covariates when it is
/// not given explicitly.
enum class BandwidthRule {
  MedianDistance,         // sigma^2 = median ||z_i - z_j||
  MedianSquaredDistance,  // sigma^2 = median ||z_i - z_j||^2
};

struct KernelSpec {
  KernelKind kind = KernelKind::Linear;
  std::optional<double> sigma2;  // Gaussian only; empty means "resolve from data"
  BandwidthRule rule = BandwidthRule::MedianDistance;

  static KernelSpec linear() { return {}; }
  static KernelSpec gaussian(double sigma2) {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
      throw Error(ErrorCode::BadParameter, "sigma^2 must be positive");
    }
    return {KernelKind::Gaussian, sigma2, BandwidthRule::MedianDistance};
  }
  static KernelSpec gaussian_median(BandwidthRule rule = BandwidthRule::MedianDistance) {
    return {KernelKind::Gaussian, std::nullopt, rule};
  }

  bool resolved() const noexcept { return kind == KernelKind::Linear || sigma2.has_value(); }

  std::string name() const { return kind == KernelKind::Linear ? "linear" : "gaussian"; }
};

/// Median of pairwise distances between rows (squared distances under
/// MedianSquaredDistance). Even counts average the two middle values.
inline double resolve_bandwidth(const CovariateMatrix& z,
                                BandwidthRule rule = BandwidthRule::MedianDistance) {
  const Eigen::Index n = z.rows();
  if (n < 2) throw Error(ErrorCode::DegenerateCovariates, "need at least two covariate vectors");
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double sq = (z.row(i) - z.row(j)).squaredNorm();
      d.push_back(rule == BandwidthRule::MedianDistance ? std::sqrt(sq) : sq);
    }
  }
  const std::size_t m = d.size();
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(m / 2);
  std::nth_element(d.begin(), mid, d.end());
  double median = *mid;
  if (m % 2 == 0) median = 0.5 * (median + *std::max_element(d.begin(), mid));
  if (!(median > 0.0)) {
    throw Error(ErrorCode::DegenerateCovariates, "median pairwise distance is zero");
  }
  return median;
}

/// Fills in sigma^2 from `anchors` when the spec leaves it open.
inline KernelSpec resolve(const KernelSpec& spec, const CovariateMatrix& anchors) {
  if (spec.resolved()) return spec;
  KernelSpec out = spec;
  out.sigma2 = resolve_bandwidth(anchors, spec.rule);
  return out;
}

inline double eval(const KernelSpec& spec, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  if (spec.kind == KernelKind::Linear) {
    double dot = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
    return dot;
  }
  if (!spec.sigma2) throw Error(ErrorCode::BadParameter, "Gaussian kernel has unresolved sigma^2");
  double sq = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double d = a[k] - b[k];
    sq += d * d;
  }
  return std::exp(-sq / (2.0 * *spec.sigma2));
}

/// Gram matrix over a fixed set of anchors.
struct KernelMatrix {
  Matrix K;
  CovariateMatrix anchors;
  KernelSpec spec;  // resolved
};

inline KernelMatrix gram(const KernelSpec& spec, const CovariateMatrix& anchors) {
  KernelMatrix out{Matrix(anchors.rows(), anchors.rows()), anchors, resolve(spec, anchors)};
  const Eigen::Index n = anchors.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      double v = eval(out.spec, row_span(anchors, i), row_span(anchors, j));
      out.K(i, j) = v;
      out.K(j, i) = v;
    }
  }
  return out;
}

/// K(rows of a, rows of b) as an a.rows() x b.rows() matrix.
inline Matrix cross_gram(const KernelSpec& spec, const CovariateMatrix& a, const CovariateMatrix& b) {
  if (a.cols() != b.cols()) throw Error(ErrorCode::DimensionMismatch, "covariate widths differ");
  Matrix out(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out(i, j) = eval(spec, row_span(a, i), row_span(b, j));
    }
  }
  return out;
}

}  // namespace mcid
