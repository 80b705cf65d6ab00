#pragma once

#include <chrono>
#include <functional>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "projections.hpp"

namespace moball {

enum class StepMode { Adaptive, Fixed };

struct SolverConfig {
  double mu = 0.01;      // line-search acceptance factor, in (0,1)
  double delta = 0.0005; // backtracking shrink factor, in (0,1)
  double sigma = 7.0;    // first trial step
  double gamma = 0.99;   // relaxation of the correction step, in (0,2)
  double e_tol = 1e-12;  // stop when |x_n - y_n| falls to this
  int max_iter = 20000;
  int max_backtracks = 120;
  StepMode step_mode = StepMode::Adaptive;
  double fixed_step = 0.0; // used only in Fixed mode
  double feas_tol = 1e-12;

  void validate() const {
    if (!(mu > 0.0 && mu < 1.0))
      throw std::invalid_argument("mu must lie in (0,1)");
    if (!(delta > 0.0 && delta < 1.0))
      throw std::invalid_argument("delta must lie in (0,1)");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (!(gamma > 0.0 && gamma < 2.0))
      throw std::invalid_argument("gamma must lie in (0,2)");
    if (!(e_tol > 0.0)) throw std::invalid_argument("e_tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (max_backtracks < 0)
      throw std::invalid_argument("max_backtracks must be >= 0");
    if (step_mode == StepMode::Fixed && !(fixed_step > 0.0))
      throw std::invalid_argument("fixed_step must be positive in fixed mode");
    if (!(feas_tol >= 0.0))
      throw std::invalid_argument("feas_tol must be nonnegative");
  }
};

struct IterateRecord {
  int n = 0;             // 1-based iteration index
  double e_n = 0.0;      // |x_n - y_n|
  double lambda_n = 0.0; // accepted step size
  double rho_n = 0.0;    // correction length <x-y,d>/|d|^2
  double d_norm = 0.0;   // |d_n|
  double f_x = 0.0;      // constraint value at x_n
  int backtracks = 0;    // accepted trial index k_n
  double elapsed_ms = 0.0; // cumulative wall time when the record was cut
};

enum class SolveStatus { Converged, MaxIterations, StationaryOperator,
                         LineSearchFailed };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIterations: return "MaxIterations";
    case SolveStatus::StationaryOperator: return "StationaryOperator";
    case SolveStatus::LineSearchFailed: return "LineSearchFailed";
  }
  return "Unknown";
}

struct SolveReport {
  SolveStatus status = SolveStatus::MaxIterations;
  RealVector solution;
  int iterations = 0;
  std::vector<IterateRecord> trace;
};

struct LineSearchResult {
  double lambda = 0.0;
  RealVector y;
  int k = 0;
  // Extras so the caller never re-evaluates the operator:
  double e = 0.0;       // |x - y| at the accepted trial
  RealVector a_x, a_y;
  bool stationary = false; // e fell to e_tol at some trial
};

namespace detail {

// Backtracking on lambda = sigma * delta^k: the trial y depends on lambda
// through the ball projection, so y is recomputed at every k. Accept the
// first k with lambda*|A(x)-A(y)| <= mu*|x-y|. A trial with |x-y| <= e_tol
// is accepted on the spot: the iterate is (numerically) a fixed point and
// the caller stops rather than divide by a vanishing gap.
inline LineSearchResult line_search_core(const VIProblem& problem,
                                         const MovingBall& ball,
                                         const RealVector& x,
                                         RealVector a_x,
                                         const SolverConfig& cfg) {
  LineSearchResult res;
  res.a_x = std::move(a_x);
  double lambda = cfg.sigma;
  for (int k = 0; k <= cfg.max_backtracks; ++k, lambda *= cfg.delta) {
    RealVector y = project_ball(ball, x - lambda * res.a_x);
    const double e = (x - y).norm();
    if (e <= cfg.e_tol) {
      res.lambda = lambda;
      res.k = k;
      res.e = e;
      res.a_y = problem.op.eval(y); // for the caller's terminal diagnostics
      res.y = std::move(y);
      res.stationary = true;
      return res;
    }
    RealVector a_y = problem.op.eval(y);
    if (lambda * (res.a_x - a_y).norm() <= cfg.mu * e) {
      res.lambda = lambda;
      res.k = k;
      res.e = e;
      res.a_y = std::move(a_y);
      res.y = std::move(y);
      return res;
    }
  }
  throw LineSearchExhausted(
      "no step accepted within max_backtracks trials; operator is not "
      "locally Lipschitz at the probed scale or parameters are pathological");
}

}  // namespace detail

inline LineSearchResult line_search(const VIProblem& problem,
                                    const RealVector& x,
                                    const SolverConfig& cfg) {
  const MovingBall ball = moving_ball(problem.constraint, x, cfg.feas_tol);
  return detail::line_search_core(problem, ball, x, problem.op.eval(x), cfg);
}

struct StepResult {
  bool stationary = false;
  RealVector x_next; // the accepted y when stationary
  IterateRecord record;
};

// One outer iteration from a feasible x. Builds the ball once, finds
// (lambda, y), then applies the correction
//   d = x - y - lambda*(A(x) - A(y)),  rho = <x-y, d>/|d|^2,
//   x_next = P_ball(x - gamma*lambda*rho*A(y)).
inline StepResult step(const VIProblem& problem, const RealVector& x,
                       const SolverConfig& cfg) {
  const double fx = problem.constraint.value(x);
  if (fx > cfg.feas_tol)
    throw InfeasiblePoint("infeasible iterate: f(x) = " + std::to_string(fx));
  const MovingBall ball = detail::moving_ball_from(
      fx, problem.constraint.gradient(x), problem.constraint.lipschitz_grad, x);

  LineSearchResult ls;
  if (cfg.step_mode == StepMode::Adaptive) {
    ls = detail::line_search_core(problem, ball, x, problem.op.eval(x), cfg);
  } else {
    ls.lambda = cfg.fixed_step;
    ls.k = 0;
    ls.a_x = problem.op.eval(x);
    ls.y = project_ball(ball, x - ls.lambda * ls.a_x);
    ls.e = (x - ls.y).norm();
    ls.stationary = ls.e <= cfg.e_tol;
    ls.a_y = problem.op.eval(ls.y);
  }

  StepResult out;
  out.record.e_n = ls.e;
  out.record.lambda_n = ls.lambda;
  out.record.backtracks = ls.k;
  out.record.f_x = fx;

  const RealVector gap = x - ls.y;
  const RealVector d = gap - ls.lambda * (ls.a_x - ls.a_y);
  const double dn = d.norm();
  out.record.d_norm = dn;

  if (ls.stationary) {
    // rho's quotient is 0/0 at a fixed point; report the neutral value.
    out.record.rho_n = 1.0;
    out.stationary = true;
    out.x_next = std::move(ls.y);
    return out;
  }

  if (dn <= 1e-300)
    throw DegenerateDirection(
        "degenerate direction: |d| collapsed while |x-y| is above tolerance");
  const double rho = gap.dot(d) / (dn * dn);
  out.record.rho_n = rho;
  out.x_next =
      project_ball(ball, x - (cfg.gamma * ls.lambda * rho) * ls.a_y);
  return out;
}

// Observer sees each finished record together with the iterate it describes.
using SolveObserver =
    std::function<void(const IterateRecord&, const RealVector&)>;

inline SolveReport solve(const VIProblem& problem, const RealVector& x1,
                         const SolverConfig& cfg,
                         const SolveObserver& observer = {}) {
  cfg.validate();
  if (x1.size() != problem.dim)
    throw std::invalid_argument("starting point dimension mismatch");
  if (!is_feasible(problem.constraint, x1, cfg.feas_tol))
    throw InfeasiblePoint("infeasible start");

  SolveReport report;
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed_ms = [&t0] {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
  };

  RealVector x = x1;
  for (int n = 1; n <= cfg.max_iter; ++n) {
    StepResult sr;
    try {
      sr = step(problem, x, cfg);
    } catch (const LineSearchExhausted&) {
      report.status = SolveStatus::LineSearchFailed;
      report.solution = std::move(x);
      report.iterations = n - 1; // completed iterations == trace length
      return report;
    }
    sr.record.n = n;
    sr.record.elapsed_ms = elapsed_ms();
    report.trace.push_back(sr.record);
    if (observer) observer(sr.record, x);

    if (sr.stationary) {
      report.status = sr.record.e_n == 0.0 ? SolveStatus::StationaryOperator
                                           : SolveStatus::Converged;
      report.solution = std::move(sr.x_next);
      report.iterations = n;
      return report;
    }
    x = std::move(sr.x_next);
  }
  report.status = SolveStatus::MaxIterations;
  report.solution = std::move(x);
  report.iterations = cfg.max_iter;
  return report;
}

}  // namespace moball
