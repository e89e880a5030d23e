#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "mcid/error.hpp"
#include "mcid/kernels.hpp"

namespace mcid {

// Convex subproblem solved once per DCA step:
//
//   min_{b,w}  C sum_i (delta - y_i (x_i - b - (Kw)_i))_+ + (lambda/2) w'Kw
//              - g_b b - v'K w,                               C = 1/(n delta)
//
// where (g_b, Kv) is the linear term. It is solved through its dual
//
//   min_a  1/2 a'Qa + p'a,  Q_ij = y_i y_j K_ij / lambda,
//          p_i = -(delta - y_i x_i) - y_i (Kv)_i / lambda,
//   s.t.   0 <= a_i <= C,  y'a = g_b
//
// by sequential minimal optimization (two-coordinate updates chosen with
// second-order working-set selection). The primal point is recovered as
// w = (v - a o y) / lambda with b minimizing the primal exactly given w,
// and the duality gap certifies accuracy.

/// Data of the convex part: scores, labels, Gram matrix and parameters.
struct InnerProblem {
  const Matrix* K = nullptr;
  std::span<const double> x;
  std::span<const int> y;
  double delta = 0.1;
  double lambda = 1.0;

  std::size_t size() const noexcept { return x.size(); }
  double box() const noexcept { return 1.0 / (static_cast<double>(x.size()) * delta); }
};

/// Linear term (g_b, K v) subtracted from the convex part.
struct LinearTerm {
  double b = 0.0;
  Vector v;  // representer coefficients of the w-part
};

struct InnerConfig {
  double tolerance = 1e-7;  // duality gap
  std::size_t max_iters = 200000;
};

enum class InnerStatus { Converged, MaxItersExceeded };

struct InnerSolution {
  double b = 0.0;
  Vector w;
  Vector Kw;
  double wKw = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
  InnerStatus status = InnerStatus::Converged;
  Vector alpha;  // dual variables, reusable as a warm start
};

namespace detail {

/// Exact minimizer over b of  C sum_i (r_i + y_i b)_+ - g_b b.
/// When the minimizer set is an interval the midpoint is returned; when it
/// is a half-line its finite end is returned.
inline double optimal_offset(std::span<const double> r, std::span<const int> y, double box,
                             double g_b) {
  const std::size_t n = r.size();
  std::vector<double> t(n);
  std::size_t n_neg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = -y[i] * r[i];
    if (y[i] < 0) ++n_neg;
  }
  std::sort(t.begin(), t.end());
  // slope after crossing k breakpoints: box * (k - n_neg) - g_b
  const double q = static_cast<double>(n_neg) + g_b / box;
  double k_real = std::ceil(q - 1e-9);
  if (k_real < 0.0) k_real = 0.0;
  auto k = static_cast<std::size_t>(k_real);
  if (k > n) k = n;
  const bool flat = std::abs(q - static_cast<double>(k)) < 1e-9;
  if (k == 0) return t.front();
  if (k == n) return t.back();
  if (flat) return 0.5 * (t[k - 1] + t[k]);
  return t[k - 1];
}

/// Moves `alpha` inside [0, box]^n onto the hyperplane y'alpha = target.
inline bool repair_equality(Vector& alpha, std::span<const int> y, double box, double target) {
  const auto n = static_cast<Eigen::Index>(y.size());
  for (Eigen::Index i = 0; i < n; ++i) alpha(i) = std::clamp(alpha(i), 0.0, box);
  double r = target;
  for (Eigen::Index i = 0; i < n; ++i) r -= y[static_cast<std::size_t>(i)] * alpha(i);
  for (Eigen::Index i = 0; i < n && std::abs(r) > 0.0; ++i) {
    const int yi = y[static_cast<std::size_t>(i)];
    // move alpha_i in the direction that shrinks |r|
    double dir = (r > 0.0) == (yi > 0) ? 1.0 : -1.0;
    double room = dir > 0.0 ? box - alpha(i) : alpha(i);
    double step = std::min(room, std::abs(r));
    alpha(i) += dir * step;
    r -= yi * dir * step;
  }
  return std::abs(r) <= 1e-12 * std::max(1.0, std::abs(target));
}

}  // namespace detail

/// Primal objective of the subproblem at (b, w), given Kw and w'Kw.
inline double inner_primal_value(const InnerProblem& prob, const LinearTerm& lin, double b,
                                 const Vector& Kw, double wKw) {
  const double box = prob.box();
  double hinge = 0.0;
  double vKw = 0.0;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    hinge += std::max(prob.delta - prob.y[i] * (prob.x[i] - b - Kw(ii)), 0.0);
    vKw += lin.v(ii) * Kw(ii);
  }
  return box * hinge + 0.5 * prob.lambda * wKw - lin.b * b - vKw;
}

/// Differentiable part of the subproblem, (lambda/2) w'Kw - g_b b - v'Kw.
inline double inner_smooth_value(const InnerProblem& prob, const LinearTerm& lin, double b,
                                 const Vector& w) {
  const Vector Kw = *prob.K * w;
  return 0.5 * prob.lambda * w.dot(Kw) - lin.b * b - lin.v.dot(Kw);
}

/// Gradient of inner_smooth_value: (d/db, d/dw) = (-g_b, lambda Kw - Kv).
inline std::pair<double, Vector> inner_smooth_gradient(const InnerProblem& prob,
                                                       const LinearTerm& lin, const Vector& w) {
  return {-lin.b, *prob.K * (prob.lambda * w - lin.v)};
}

inline InnerSolution solve_inner(const InnerProblem& prob, const LinearTerm& lin,
                                 const InnerConfig& config = {},
                                 const Vector* warm_alpha = nullptr) {
  const Matrix& K = *prob.K;
  const std::size_t n = prob.size();
  const auto N = static_cast<Eigen::Index>(n);
  if (K.rows() != N || K.cols() != N || prob.y.size() != n || lin.v.size() != N) {
    throw Error(ErrorCode::DimensionMismatch, "inner problem sizes disagree");
  }
  if (!(prob.lambda > 0.0) || !(prob.delta > 0.0)) {
    throw Error(ErrorCode::BadParameter, "lambda and delta must be positive");
  }
  const double box = prob.box();
  const double lam = prob.lambda;
  const auto y = prob.y;

  // Feasible start.
  Vector alpha = warm_alpha && warm_alpha->size() == N ? *warm_alpha : Vector(Vector::Zero(N));
  if (!warm_alpha) {
    for (Eigen::Index i = 0; i < N; ++i) {
      // natural start for DCA linear terms: alpha = C on the support of v
      alpha(i) = lin.v(i) != 0.0 ? box : 0.0;
    }
  }
  if (!detail::repair_equality(alpha, y, box, lin.b)) {
    throw Error(ErrorCode::InnerSolverFailure, "linear term makes the offset unbounded");
  }

  Vector ya(N);
  for (Eigen::Index i = 0; i < N; ++i) ya(i) = y[static_cast<std::size_t>(i)] * alpha(i);
  const Vector Kv = K * lin.v;
  Vector p(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const int yi = y[static_cast<std::size_t>(i)];
    p(i) = -(prob.delta - yi * prob.x[static_cast<std::size_t>(i)]) - yi * Kv(i) / lam;
  }
  Vector G = p;
  if (ya.cwiseAbs().maxCoeff() > 0.0) {
    const Vector Kya = K * ya;
    for (Eigen::Index i = 0; i < N; ++i) G(i) += y[static_cast<std::size_t>(i)] * Kya(i) / lam;
  }

  std::vector<double> r(n);
  Vector Kw(N);
  auto recover = [&](InnerSolution& out) {
    // K(a o y)/lambda = y o (G - p)
    Vector w(N);
    double ae = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
      const int yi = y[static_cast<std::size_t>(i)];
      Kw(i) = Kv(i) / lam - yi * (G(i) - p(i));
      w(i) = (lin.v(i) - yi * alpha(i)) / lam;
      ae += alpha(i) * (prob.delta - yi * prob.x[static_cast<std::size_t>(i)]);
    }
    const double wKw = std::max(w.dot(Kw), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = prob.delta - y[i] * prob.x[i] + y[i] * Kw(static_cast<Eigen::Index>(i));
    }
    const double b = detail::optimal_offset(r, y, box, lin.b);
    out.b = b;
    out.w = std::move(w);
    out.Kw = Kw;
    out.wKw = wKw;
    out.primal = inner_primal_value(prob, lin, b, Kw, wKw);
    out.dual = ae - 0.5 * lam * wKw;
    out.gap = out.primal - out.dual;
    out.alpha = alpha;
  };

  auto in_up = [&](Eigen::Index t) {
    return y[static_cast<std::size_t>(t)] > 0 ? alpha(t) < box : alpha(t) > 0.0;
  };
  auto in_low = [&](Eigen::Index t) {
    return y[static_cast<std::size_t>(t)] > 0 ? alpha(t) > 0.0 : alpha(t) < box;
  };

  constexpr double tau = 1e-12;
  const std::size_t check_every = std::max<std::size_t>(n, 64);
  InnerSolution best;
  best.primal = std::numeric_limits<double>::infinity();
  best.status = InnerStatus::MaxItersExceeded;
  std::size_t iter = 0;

  for (;;) {
    bool kkt_done = false;
    // working-set selection
    double g_max = -std::numeric_limits<double>::infinity();
    Eigen::Index i_sel = -1;
    for (Eigen::Index t = 0; t < N; ++t) {
      if (in_up(t)) {
        double v = -y[static_cast<std::size_t>(t)] * G(t);
        if (v >= g_max) {
          g_max = v;
          i_sel = t;
        }
      }
    }
    double g_max2 = -std::numeric_limits<double>::infinity();
    Eigen::Index j_sel = -1;
    double obj_min = std::numeric_limits<double>::infinity();
    if (i_sel >= 0) {
      const double* Ki = K.col(i_sel).data();
      const double Kii = Ki[i_sel];
      for (Eigen::Index t = 0; t < N; ++t) {
        if (!in_low(t)) continue;
        const double ytGt = y[static_cast<std::size_t>(t)] * G(t);
        g_max2 = std::max(g_max2, ytGt);
        const double grad_diff = g_max + ytGt;
        if (grad_diff > 0.0) {
          double quad = (Kii + K(t, t) - 2.0 * Ki[t]) / lam;
          if (quad <= 0.0) quad = tau;
          const double obj = -(grad_diff * grad_diff) / quad;
          if (obj <= obj_min) {
            obj_min = obj;
            j_sel = t;
          }
        }
      }
    }
    if (i_sel < 0 || j_sel < 0 || g_max + g_max2 < 1e-14) kkt_done = true;

    if (kkt_done || iter % check_every == 0 || iter >= config.max_iters) {
      InnerSolution cur;
      recover(cur);
      cur.iterations = iter;
      // an exhausted working set means optimal up to rounding
      if (cur.gap <= config.tolerance || kkt_done) {
        cur.status = InnerStatus::Converged;
        return cur;
      }
      if (cur.primal < best.primal) best = cur;
      if (iter >= config.max_iters) {
        best.status = InnerStatus::MaxItersExceeded;
        best.iterations = iter;
        return best;
      }
    }

    // two-variable update
    const Eigen::Index i = i_sel;
    const Eigen::Index j = j_sel;
    const int yi = y[static_cast<std::size_t>(i)];
    const int yj = y[static_cast<std::size_t>(j)];
    const double* Ki = K.col(i).data();
    const double* Kj = K.col(j).data();
    const double old_ai = alpha(i);
    const double old_aj = alpha(j);
    double quad = (Ki[i] + Kj[j] - 2.0 * Ki[j]) / lam;
    if (quad <= 0.0) quad = tau;
    if (yi != yj) {
      const double d = (-G(i) - G(j)) / quad;
      const double diff = alpha(i) - alpha(j);
      alpha(i) += d;
      alpha(j) += d;
      if (diff > 0.0) {
        if (alpha(j) < 0.0) {
          alpha(j) = 0.0;
          alpha(i) = diff;
        }
      } else if (alpha(i) < 0.0) {
        alpha(i) = 0.0;
        alpha(j) = -diff;
      }
      if (diff > 0.0) {
        if (alpha(i) > box) {
          alpha(i) = box;
          alpha(j) = box - diff;
        }
      } else if (alpha(j) > box) {
        alpha(j) = box;
        alpha(i) = box + diff;
      }
    } else {
      const double d = (G(i) - G(j)) / quad;
      const double sum = alpha(i) + alpha(j);
      alpha(i) -= d;
      alpha(j) += d;
      if (sum > box) {
        if (alpha(i) > box) {
          alpha(i) = box;
          alpha(j) = sum - box;
        }
      } else if (alpha(j) < 0.0) {
        alpha(j) = 0.0;
        alpha(i) = sum;
      }
      if (sum > box) {
        if (alpha(j) > box) {
          alpha(j) = box;
          alpha(i) = sum - box;
        }
      } else if (alpha(i) < 0.0) {
        alpha(i) = 0.0;
        alpha(j) = sum;
      }
    }
    const double dai = (alpha(i) - old_ai) * yi / lam;
    const double daj = (alpha(j) - old_aj) * yj / lam;
    for (Eigen::Index t = 0; t < N; ++t) {
      G(t) += y[static_cast<std::size_t>(t)] * (Ki[t] * dai + Kj[t] * daj);
    }
    ++iter;
  }
}

}  // namespace mcid
