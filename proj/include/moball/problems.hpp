#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>

#include <Eigen/Dense>

#include "core.hpp"
#include "projections.hpp"
#include "rng.hpp"

namespace moball {

// Feasible set {x : (x-t)' T (x-t) <= u^2} stored with its exact spectral
// norm, which doubles as the gradient Lipschitz constant of
// f(x) = ((x-t)' T (x-t) - u^2) / 2.
struct EllipsoidSpec {
  Eigen::MatrixXd T;
  RealVector t;
  double u = 1.0;
  double spectral_norm_T = 1.0;
};

// Largest eigenvalue of a symmetric positive-definite matrix by power
// iteration, to 1e-10 relative. Used when T arrives without a known norm
// (e.g. loaded from a file); generated instances carry the exact value.
inline double spectral_norm(const Eigen::MatrixXd& T) {
  SplitMix64 g(0x9E3779B97F4A7C15ULL);
  RealVector v(T.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = g.normal();
  v.normalize();
  double theta = 0.0;
  for (int it = 0; it < 100000; ++it) {
    RealVector w = T * v;
    const double theta_next = v.dot(w);
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    v = w / wn;
    if (std::abs(theta_next - theta) <= 1e-10 * std::abs(theta_next))
      return theta_next;
    theta = theta_next;
  }
  return theta;
}

inline SmoothConstraint ellipsoid_constraint(const EllipsoidSpec& spec) {
  auto data = std::make_shared<EllipsoidSpec>(spec);
  SmoothConstraint c;
  c.value = [data](const RealVector& x) {
    const RealVector d = x - data->t;
    return 0.5 * (d.dot(data->T * d) - data->u * data->u);
  };
  c.gradient = [data](const RealVector& x) -> RealVector {
    return data->T * (x - data->t);
  };
  c.lipschitz_grad = spec.spectral_norm_T;
  return c;
}

// Four-dimensional benchmark: a fixed quadratic cost map over an ellipsoid.
inline VIProblem example1(const EllipsoidSpec& spec) {
  if (spec.T.rows() != 4 || spec.t.size() != 4)
    throw std::invalid_argument("example1 requires dimension 4");
  VIProblem p;
  p.op.eval = [](const RealVector& x) -> RealVector {
    const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3];
    RealVector a(4);
    a[0] = 3.0 * x1 * x1 + 2.0 * x1 * x2 + 2.0 * x2 * x2 + x3 + 3.0 * x4 - 6.0;
    a[1] = 2.0 * x1 * x1 + x1 + x2 * x2 + 10.0 * x3 + 2.0 * x4 - 2.0;
    a[2] = 3.0 * x1 * x1 + x1 * x2 + 2.0 * x2 * x2 + 2.0 * x3 + 9.0 * x4 - 9.0;
    a[3] = x1 * x1 + 3.0 * x2 * x2 + 2.0 * x3 + 3.0 * x4 - 3.0;
    return a;
  };
  p.constraint = ellipsoid_constraint(spec);
  p.dim = 4;
  p.slater_point = spec.t;
  return p;
}

// n-dimensional benchmark: componentwise arctan plus a banded matrix
// (diagonal 4, superdiagonal -2, subdiagonal 1) plus the all-minus-one
// vector. The banded product keeps each evaluation O(n).
inline VIProblem example2(Eigen::Index n, const EllipsoidSpec& spec) {
  if (n < 2) throw std::invalid_argument("example2 requires n >= 2");
  if (spec.T.rows() != n || spec.t.size() != n)
    throw std::invalid_argument("example2 constraint dimension mismatch");
  VIProblem p;
  p.op.eval = [n](const RealVector& x) -> RealVector {
    RealVector a(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double v = std::atan(x[i]) + 4.0 * x[i] - 1.0;
      if (i + 1 < n) v -= 2.0 * x[i + 1];
      if (i > 0) v += x[i - 1];
      a[i] = v;
    }
    return a;
  };
  p.constraint = ellipsoid_constraint(spec);
  p.dim = n;
  p.slater_point = spec.t;
  return p;
}

namespace detail {

// Draw order is part of the reproducibility contract:
//   eigenvalues (n draws), Gaussian matrix (n*n, column-major),
//   center (n), radius parameter (1).
inline EllipsoidSpec random_ellipsoid_stream(SplitMix64& g, Eigen::Index n,
                                             double cond_cap) {
  if (n < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(cond_cap >= 1.0))
    throw std::invalid_argument("cond_cap must be >= 1");
  EllipsoidSpec spec;
  RealVector lam(n);
  const double log_cap = std::log(cond_cap);
  for (Eigen::Index i = 0; i < n; ++i) lam[i] = std::exp(log_cap * g.u01());
  const Eigen::MatrixXd G = gaussian_matrix(g, n, n);
  const Eigen::MatrixXd Q =
      Eigen::HouseholderQR<Eigen::MatrixXd>(G).householderQ();
  Eigen::MatrixXd T = Q.transpose() * lam.asDiagonal() * Q;
  spec.T = 0.5 * (T + T.transpose());
  spec.t = uniform_vector(g, n, -1.0, 1.0);
  spec.u = 0.5 + 1.5 * g.u01();
  spec.spectral_norm_T = lam.maxCoeff();
  return spec;
}

}  // namespace detail

inline EllipsoidSpec random_ellipsoid(std::uint64_t seed, Eigen::Index n,
                                      double cond_cap) {
  SplitMix64 g(seed);
  return detail::random_ellipsoid_stream(g, n, cond_cap);
}

// Known-solution instance: A(x) = x - p is strongly monotone, so the unique
// solution is the projection of p onto the ellipsoid, computed here by the
// independent multiplier-equation oracle.
inline VIProblem projection_problem(const EllipsoidSpec& spec,
                                    const RealVector& p) {
  if (p.size() != spec.t.size())
    throw std::invalid_argument("projection point dimension mismatch");
  VIProblem prob;
  auto pp = std::make_shared<RealVector>(p);
  prob.op.eval = [pp](const RealVector& x) -> RealVector { return x - *pp; };
  prob.constraint = ellipsoid_constraint(spec);
  prob.dim = p.size();
  prob.known_solution = project_ellipsoid(spec.T, spec.t, spec.u, p);
  prob.slater_point = spec.t;
  return prob;
}

struct ProjectionInstance {
  EllipsoidSpec spec;
  RealVector p;
  VIProblem problem;
};

// One seed pins the whole instance: the ellipsoid draws first, then p
// componentwise uniform in [-3,3] from the same stream (mostly exterior).
inline ProjectionInstance projection_instance(std::uint64_t seed,
                                              Eigen::Index n,
                                              double cond_cap) {
  SplitMix64 g(seed);
  ProjectionInstance inst;
  inst.spec = detail::random_ellipsoid_stream(g, n, cond_cap);
  inst.p = uniform_vector(g, n, -3.0, 3.0);
  inst.problem = projection_problem(inst.spec, inst.p);
  return inst;
}

}  // namespace moball
