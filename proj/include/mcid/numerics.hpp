#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "mcid/error.hpp"

namespace mcid::numerics {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

namespace detail {

template <typename F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth, bool& ok) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m);
  double rm = 0.5 * (m + b);
  double flm = f(lm);
  double frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0) {
    ok = false;
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, ok) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, ok);
}

}  // namespace detail

/// Adaptive Simpson integration of f over [a, b] to absolute tolerance `tol`.
/// Kinks and jumps of f should be listed in `breaks`; the integral is assembled
/// piecewise between them, and panel ends are sampled one ulp inside so a jump
/// at a break contributes its one-sided limit.
template <typename F>
double integrate(const F& f, double a, double b, double tol, std::span<const double> breaks = {},
                 int max_depth = 48) {
  std::vector<double> knots{a};
  for (double t : breaks) {
    if (t > a && t < b) knots.push_back(t);
  }
  knots.push_back(b);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  double total = 0.0;
  bool ok = true;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    double lo = knots[k];
    double hi = knots[k + 1];
    double panel_tol = tol * (hi - lo) / (b - a);
    double flo = f(std::nextafter(lo, hi));
    double fhi = f(std::nextafter(hi, lo));
    double fm = f(0.5 * (lo + hi));
    double whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
    total += detail::simpson_step(f, lo, hi, flo, fm, fhi, whole, panel_tol, max_depth, ok);
  }
  if (!ok) throw Error(ErrorCode::QuadratureFailure, "adaptive Simpson hit its depth limit");
  return total;
}

/// Golden-section search for a minimum of a unimodal f on [lo, hi].
template <typename F>
double golden_section_minimize(const F& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  while (hi - lo > tol) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

/// Root of a monotone function g on [lo, hi] by bisection.
template <typename G>
double bisect_root(const G& g, double lo, double hi, double tol) {
  double glo = g(lo);
  double ghi = g(hi);
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if ((glo < 0.0) == (ghi < 0.0)) {
    throw Error(ErrorCode::RootNotBracketed, "function has the same sign at both ends");
  }
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace mcid::numerics
