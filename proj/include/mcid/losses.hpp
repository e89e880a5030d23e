#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "mcid/error.hpp"
#include "mcid/format.hpp"
#include "mcid/numerics.hpp"

namespace mcid {

enum class LossTag { ZeroOne, PsiDelta, Hinge, Logistic, Psi };

/// A margin loss L(u). `delta` is only meaningful for PsiDelta.
struct LossKind {
  LossTag tag = LossTag::ZeroOne;
  double delta = 0.0;

  static LossKind zero_one() { return {LossTag::ZeroOne, 0.0}; }
  static LossKind hinge() { return {LossTag::Hinge, 0.0}; }
  static LossKind logistic() { return {LossTag::Logistic, 0.0}; }
  static LossKind psi() { return {LossTag::Psi, 0.0}; }
  static LossKind psi_delta(double delta) {
    if (!(delta > 0.0) || !std::isfinite(delta)) {
      throw Error(ErrorCode::BadParameter, "psi_delta requires delta > 0");
    }
    return {LossTag::PsiDelta, delta};
  }

  std::string name() const {
    switch (tag) {
      case LossTag::ZeroOne: return "zero-one";
      case LossTag::PsiDelta: return "psi-delta(" + format_double(delta) + ")";
      case LossTag::Hinge: return "hinge";
      case LossTag::Logistic: return "logistic";
      case LossTag::Psi: return "psi";
    }
    return "unknown";
  }
};

/// sign(u) with the convention sign(0) = +1.
constexpr int sign_pos(double u) noexcept { return u >= 0.0 ? 1 : -1; }

inline double loss_value(const LossKind& kind, double u) {
  switch (kind.tag) {
    case LossTag::ZeroOne:
      return u >= 0.0 ? 0.0 : 1.0;
    case LossTag::PsiDelta:
      return std::min(std::max(kind.delta - u, 0.0) / kind.delta, 1.0);
    case LossTag::Hinge:
      return std::max(1.0 - u, 0.0);
    case LossTag::Logistic:
      // log(1 + e^{-u}) without overflow for large |u|
      return u > 0.0 ? std::log1p(std::exp(-u)) : -u + std::log1p(std::exp(u));
    case LossTag::Psi:
      return std::min(std::max(1.0 - u, 0.0), 1.0);
  }
  return 0.0;
}

/// A subgradient of L at u. At the junction of a capped arm and a ramp the
/// capped arm's slope (0) is reported; at the foot of a ramp the ramp's
/// left derivative is reported.
inline double loss_subgradient(const LossKind& kind, double u) {
  switch (kind.tag) {
    case LossTag::ZeroOne:
      return 0.0;
    case LossTag::PsiDelta:
      return (u > 0.0 && u <= kind.delta) ? -1.0 / kind.delta : 0.0;
    case LossTag::Hinge:
      return u <= 1.0 ? -1.0 : 0.0;
    case LossTag::Logistic:
      return -1.0 / (1.0 + std::exp(u));
    case LossTag::Psi:
      return (u > 0.0 && u <= 1.0) ? -1.0 : 0.0;
  }
  return 0.0;
}

/// Convex pieces of the psi_delta loss: L_delta(u) = first - second with
/// first = (delta - u)_+ / delta and second = (-u)_+ / delta.
struct DcParts {
  double first;
  double second;
};

inline DcParts psi_delta_dc_parts(double delta, double u) {
  if (!(delta > 0.0)) throw Error(ErrorCode::BadParameter, "delta must be positive");
  return {std::max(delta - u, 0.0) / delta, std::max(-u, 0.0) / delta};
}

/// Joint law of (X, Y): X has density `density` supported on [a, b] and
/// P(Y = 1 | X = x) = p(x).
struct PopulationSpec {
  double a = -1.0;
  double b = 1.0;
  std::function<double(double)> density;
  std::function<double(double)> p;
  double tolerance = 1e-8;

  static PopulationSpec uniform(double a, double b, std::function<double(double)> p,
                                double tolerance = 1e-8) {
    if (!(a < b)) throw Error(ErrorCode::BadParameter, "uniform support needs a < b");
    double height = 1.0 / (b - a);
    return {a, b, [height](double) { return height; }, std::move(p), tolerance};
  }

  /// Checks a < b, p within [0,1] and nondecreasing on a grid of `points`.
  void check(int points = 201) const {
    if (!(a < b) || !density || !p) {
      throw Error(ErrorCode::BadParameter, "population spec needs a < b, density and p");
    }
    double prev = -1.0;
    for (int k = 0; k < points; ++k) {
      double x = a + (b - a) * k / (points - 1);
      double v = p(x);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::BadParameter, "p(x) outside [0,1] at x=" + std::to_string(x));
      }
      if (v < prev) throw Error(ErrorCode::BadParameter, "p is decreasing near x=" + std::to_string(x));
      prev = v;
    }
  }
};

/// Kinks of u -> L(u), as margins.
inline std::vector<double> loss_kinks(const LossKind& kind) {
  switch (kind.tag) {
    case LossTag::ZeroOne: return {0.0};
    case LossTag::PsiDelta: return {0.0, kind.delta};
    case LossTag::Hinge: return {1.0};
    case LossTag::Logistic: return {};
    case LossTag::Psi: return {0.0, 1.0};
  }
  return {};
}

/// E[L(Y (X - c))] under `spec`, by adaptive quadrature split at the kinks.
inline double population_risk(const LossKind& kind, const PopulationSpec& spec, double c) {
  if (!std::isfinite(c)) throw Error(ErrorCode::BadParameter, "threshold must be finite");
  auto integrand = [&](double x) {
    double px = spec.p(x);
    return (px * loss_value(kind, x - c) + (1.0 - px) * loss_value(kind, c - x)) * spec.density(x);
  };
  std::vector<double> breaks;
  for (double k : loss_kinks(kind)) {
    breaks.push_back(c + k);
    breaks.push_back(c - k);
  }
  return numerics::integrate(integrand, spec.a, spec.b, spec.tolerance, breaks);
}

/// argmin_c population_risk(kind, spec, c): coarse grid bracket on [a, b]
/// followed by golden-section refinement to `tol`.
inline double surrogate_minimizer(const LossKind& kind, const PopulationSpec& spec,
                                  double tol = 1e-6, int grid_points = 121) {
  spec.check();
  std::vector<double> grid(static_cast<std::size_t>(grid_points));
  std::vector<double> risk(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grid[k] = spec.a + (spec.b - spec.a) * static_cast<double>(k) / (grid_points - 1);
    risk[k] = population_risk(kind, spec, grid[k]);
  }
  auto best = static_cast<std::size_t>(std::min_element(risk.begin(), risk.end()) - risk.begin());
  if (best == 0 || best + 1 == grid.size()) {
    throw Error(ErrorCode::NoBracketFound,
                kind.name() + " risk is minimized at the edge of the support");
  }
  return numerics::golden_section_minimize(
      [&](double c) { return population_risk(kind, spec, c); }, grid[best - 1], grid[best + 1],
      tol);
}

/// The fixed counterexample instance: X ~ Unif(-3, 3), c* = 0, p convex below
/// c* and linear above it, C^1 at c*.
inline PopulationSpec counterexample_population() {
  constexpr double slope = 0.4 / 3.0;
  constexpr double kappa = 2.0 * slope;
  return PopulationSpec::uniform(-3.0, 3.0, [](double x) {
    return x >= 0.0 ? 0.5 + slope * x : 0.5 * std::exp(kappa * x);
  });
}

}  // namespace mcid
