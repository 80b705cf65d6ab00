#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace moball {

using RealVector = Eigen::VectorXd;

struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a base point or starting point violates f(x) <= tol.
struct InfeasiblePoint : SolveError {
  using SolveError::SolveError;
};

// Raised when backtracking exhausts its trial budget.
struct LineSearchExhausted : SolveError {
  using SolveError::SolveError;
};

// Raised when a scalar root find cannot bracket its root.
struct IllConditioned : SolveError {
  using SolveError::SolveError;
};

// Raised when the correction direction collapses while the iterate gap is
// still above tolerance; indicates numerical breakdown, not convergence.
struct DegenerateDirection : SolveError {
  using SolveError::SolveError;
};

// Constraint set {x : f(x) <= 0} described by a convex, continuously
// differentiable f whose gradient is Lipschitz with constant lipschitz_grad.
// Overestimating lipschitz_grad is safe (it only shrinks the inner ball).
struct SmoothConstraint {
  std::function<double(const RealVector&)> value;
  std::function<RealVector(const RealVector&)> gradient;
  double lipschitz_grad = 1.0;
};

struct CostOperator {
  std::function<RealVector(const RealVector&)> eval;
};

struct VIProblem {
  CostOperator op;
  SmoothConstraint constraint;
  Eigen::Index dim = 0;
  std::optional<RealVector> known_solution;
  std::optional<RealVector> slater_point;
};

// Inner ball anchored at the current iterate: center x - grad f(x)/L with
// radius^2 = |grad f(x)|^2/L^2 - 2 f(x)/L. Every point of the ball is
// feasible, which is what lets the solver project onto the ball instead of
// the original set.
struct MovingBall {
  RealVector center;
  double radius = 0.0;
};

inline bool is_feasible(const SmoothConstraint& c, const RealVector& x,
                        double tol) {
  return c.value(x) <= tol;
}

namespace detail {

// Ball from precomputed f(x) and grad f(x); callers that already paid for
// those evaluations reuse them here.
inline MovingBall moving_ball_from(double fx, const RealVector& gx, double L,
                                   const RealVector& x) {
  MovingBall ball;
  ball.center = x - gx / L;
  const double gnorm2 = gx.squaredNorm();
  double r2 = gnorm2 / (L * L) - 2.0 * fx / L;
  if (r2 < 0.0) {
    // Rounding at an exactly-boundary x can push r^2 a hair negative; a
    // genuinely negative value means the base point was not feasible.
    if (r2 < -1e-14)
      throw InfeasiblePoint("infeasible base point: radius^2 = " +
                            std::to_string(r2));
    r2 = 0.0;
  }
  ball.radius = std::sqrt(r2);
  return ball;
}

}  // namespace detail

inline MovingBall moving_ball(const SmoothConstraint& c, const RealVector& x,
                              double feas_tol = 1e-12) {
  const double fx = c.value(x);
  if (fx > feas_tol)
    throw InfeasiblePoint("infeasible base point: f(x) = " +
                          std::to_string(fx));
  return detail::moving_ball_from(fx, c.gradient(x), c.lipschitz_grad, x);
}

}  // namespace moball
