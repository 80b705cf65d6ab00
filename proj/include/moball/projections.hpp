#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"

namespace moball {

namespace detail {

// Deterministic total order on vectors of equal size. Used only to pick a
// canonical representative when radial rescaling rounds into a cycle.
inline bool lex_less(const RealVector& a, const RealVector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

}  // namespace detail

// Nearest point of a ball. Points inside the acceptance band are returned
// unchanged; points outside are pulled radially onto the sphere.
//
// Exact idempotence is the load-bearing property here, and it fails for the
// naive one-pass rescale: recomputing ||p - center|| on re-entry picks up
// absolute roundoff near eps*||center||, which can exceed a purely relative
// band radius*1e-15 and make the second call move the point again. The
// acceptance band therefore adds an absorbing term sized to dominate the
// recomputed-norm noise of any rescale output: per-coordinate multiply, add,
// and re-subtract each contribute at most eps*(|c_i| + radius), and the two
// norm evaluations contribute about n/2 ulps each, so
//   eps * ((n + 16)*radius + 4*||center||)
// covers the total with at least a factor-two margin at every term. Every
// rescaled point then lands inside the band and is accepted as-is when fed
// back in, which is exactly idempotence. The orbit bookkeeping below is a
// backstop for scales the bound does not cover (subnormal scale factors): if
// the rescale map ever rounds into a cycle of points outside the band, the
// lexicographically smallest cycle member is returned, a choice that depends
// only on the cycle and so also reprojects to itself.
inline RealVector project_ball(const MovingBall& ball, const RealVector& z) {
  if (ball.radius == 0.0) return ball.center;
  const double eps = std::numeric_limits<double>::epsilon();
  const double dim = static_cast<double>(z.size());
  const double absorb =
      eps * ((dim + 16.0) * ball.radius + 4.0 * ball.center.norm());
  const double band = ball.radius * (1.0 + 1e-15) + absorb;
  RealVector cur = z;
  std::vector<RealVector> visited;
  for (int pass = 0; pass < 16; ++pass) {
    const RealVector d = cur - ball.center;
    const double s = d.norm();
    if (s <= band) return cur;
    if (s <= 1e-300) return cur;  // cur is the center at denormal scale
    RealVector next = ball.center + (ball.radius / s) * d;
    if (next == cur) return cur;
    for (std::size_t j = 0; j < visited.size(); ++j) {
      if (next == visited[j]) {
        RealVector best = std::move(next);
        for (std::size_t k = j + 1; k < visited.size(); ++k)
          if (detail::lex_less(visited[k], best)) best = visited[k];
        if (detail::lex_less(cur, best)) best = std::move(cur);
        return best;
      }
    }
    visited.push_back(std::move(cur));
    cur = std::move(next);
  }
  return cur;
}

namespace detail {

// Solve (I + nu*T) x = b. Direct Cholesky for small systems; matrix-free
// conjugate gradients for large ones, where forming/factoring the shifted
// matrix per root-finding step would dominate.
inline RealVector shifted_solve(const Eigen::MatrixXd& T, double nu,
                                const RealVector& b, bool use_cg) {
  const Eigen::Index n = b.size();
  if (!use_cg) {
    Eigen::MatrixXd M = nu * T;
    M.diagonal().array() += 1.0;
    return M.ldlt().solve(b);
  }
  RealVector x = RealVector::Zero(n);
  RealVector r = b;
  RealVector p = r;
  double rs = r.squaredNorm();
  const double stop = 1e-28 * rs;  // residual down 14 digits
  const Eigen::Index cap = 10 * n;
  for (Eigen::Index it = 0; it < cap && rs > stop; ++it) {
    RealVector Ap = p + nu * (T * p);
    const double alpha = rs / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    const double rs_next = r.squaredNorm();
    p = r + (rs_next / rs) * p;
    rs = rs_next;
  }
  return x;
}

// Projection onto {x : (x-t)' T (x-t) <= u^2} via the multiplier equation.
// The minimizer has the form x(nu) = (I + nu*T)^{-1} (z + nu*T*t), i.e.
// x(nu) - t = (I + nu*T)^{-1} (z - t), and the scalar
//   g(nu) = (x(nu)-t)' T (x(nu)-t) - u^2
// is strictly decreasing on nu >= 0, positive at 0 for infeasible z. We
// bracket its root by doubling, then run Newton with bisection as safeguard:
//   g'(nu) = -2 w' T (I + nu*T)^{-1} T w,   w = x(nu) - t.
inline RealVector project_ellipsoid_impl(const Eigen::MatrixXd& T,
                                         const RealVector& t, double u,
                                         const RealVector& z, bool use_cg) {
  if (u <= 0.0) throw std::invalid_argument("ellipsoid radius must be positive");
  const RealVector zt = z - t;
  const double u2 = u * u;
  if (zt.dot(T * zt) <= u2) return z;

  const auto g_of = [&](double nu, RealVector& w_out) {
    w_out = shifted_solve(T, nu, zt, use_cg);
    return w_out.dot(T * w_out) - u2;
  };

  RealVector w;
  double lo = 0.0;
  double hi = 1.0;
  double g_hi = g_of(hi, w);
  int doublings = 0;
  while (g_hi > 0.0) {
    if (++doublings > 200)
      throw IllConditioned("ill-conditioned: cannot bracket multiplier root");
    lo = hi;
    hi *= 2.0;
    g_hi = g_of(hi, w);
  }

  // tol is the guaranteed bound; once inside it we keep polishing while the
  // residual still improves, down to an evaluation-noise floor, so the
  // returned point is accurate to roundoff rather than to tol.
  const double tol = 1e-12 * u2;
  const double floor_tol = 32.0 * std::numeric_limits<double>::epsilon() * u2;
  double nu = 0.5 * (lo + hi);
  double g = g_of(nu, w);
  RealVector best_w = w;
  double best_abs = std::abs(g);
  for (int it = 0; it < 500; ++it) {
    if (std::abs(g) <= floor_tol) break;
    if (g > 0.0)
      lo = nu;
    else
      hi = nu;
    const RealVector Tw = T * w;
    const double gp = -2.0 * Tw.dot(shifted_solve(T, nu, Tw, use_cg));
    double nu_next = (gp < 0.0) ? nu - g / gp : lo;
    if (!(nu_next > lo && nu_next < hi)) nu_next = 0.5 * (lo + hi);
    nu = nu_next;
    g = g_of(nu, w);
    if (std::abs(g) < best_abs) {
      best_abs = std::abs(g);
      best_w = w;
    } else if (best_abs <= tol) {
      break;  // inside the contract and no longer improving
    }
  }
  if (best_abs > tol)
    throw IllConditioned("ill-conditioned: multiplier iteration stalled");
  return t + best_w;
}

}  // namespace detail

inline RealVector project_ellipsoid(const Eigen::MatrixXd& T,
                                    const RealVector& t, double u,
                                    const RealVector& z) {
  return detail::project_ellipsoid_impl(T, t, u, z, /*use_cg=*/z.size() > 64);
}

}  // namespace moball
