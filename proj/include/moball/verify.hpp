#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "solver.hpp"

namespace moball {

enum class CertificateKind { InteriorStationary, BoundaryKKT, Failed };

inline const char* to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::InteriorStationary: return "InteriorStationary";
    case CertificateKind::BoundaryKKT: return "BoundaryKKT";
    case CertificateKind::Failed: return "Failed";
  }
  return "Unknown";
}

struct Certificate {
  CertificateKind kind = CertificateKind::Failed;
  double eta = 0.0;      // multiplier, BoundaryKKT only
  double residual = 0.0; // defect of the accepted (or least-bad) condition
};

// First-order optimality check, independent of the solver: either the cost
// operator vanishes at x (interior solution), or x sits on the boundary and
// A(x) points opposite the constraint gradient, A(x) = -eta * grad f(x) for
// some eta > 0. The multiplier is recovered by least squares, so `residual`
// reports how colinear the two vectors actually are. All tolerances are
// relative, scaled by 1 + |.|, since instance magnitudes vary widely.
inline Certificate kkt_certificate(const VIProblem& problem,
                                   const RealVector& x, double tol) {
  Certificate cert;
  const RealVector a = problem.op.eval(x);
  const double interior_defect = a.norm() / (1.0 + x.norm());
  if (interior_defect <= tol) {
    cert.kind = CertificateKind::InteriorStationary;
    cert.residual = interior_defect;
    return cert;
  }

  const double fx = problem.constraint.value(x);
  const double f_scale =
      problem.slater_point
          ? 1.0 + std::abs(problem.constraint.value(*problem.slater_point))
          : 1.0;
  const double boundary_gap = std::abs(fx) / f_scale;

  double colinear_defect = std::numeric_limits<double>::infinity();
  if (boundary_gap <= tol) {
    const RealVector g = problem.constraint.gradient(x);
    const double gn2 = g.squaredNorm();
    if (std::sqrt(gn2) <= 1e-300)
      throw SolveError(
          "zero gradient on boundary: optimality dichotomy inapplicable");
    const double eta = -a.dot(g) / gn2;
    colinear_defect = (a + eta * g).norm() / (1.0 + a.norm());
    if (eta > 0.0 && colinear_defect <= tol) {
      cert.kind = CertificateKind::BoundaryKKT;
      cert.eta = eta;
      cert.residual = colinear_defect;
      return cert;
    }
  }
  cert.kind = CertificateKind::Failed;
  cert.residual =
      std::min(interior_defect, std::max(boundary_gap, colinear_defect));
  return cert;
}

struct AuditCheck {
  std::string name;
  bool passed = true;
  long violations = 0;
  std::string detail;
};

struct AuditReport {
  std::vector<AuditCheck> checks;
  bool passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const AuditCheck& c) { return c.passed; });
  }
};

namespace detail {

inline std::string at_iteration(int n) {
  return " at iteration " + std::to_string(n);
}

}  // namespace detail

// Re-derives every per-iteration guarantee from the raw trace numbers.
// Checks that depend on the adaptive line search (step-size cap, correction
// bounds) switch to the fixed-step contract when cfg says so. The optional
// iterate dump (one vector per record, plus the final solution) unlocks the
// distance-to-solution checks.
inline AuditReport audit_trace(const std::vector<IterateRecord>& trace,
                               const SolverConfig& cfg,
                               const RealVector* known_solution = nullptr,
                               const std::vector<RealVector>* iterates =
                                   nullptr) {
  AuditReport report;
  const auto add = [&report](AuditCheck c) { report.checks.push_back(std::move(c)); };

  {
    AuditCheck c{"records-well-formed", true, 0, ""};
    int prev_n = 0;
    for (const auto& r : trace) {
      const bool ok = r.n == prev_n + 1 && r.e_n >= 0.0 &&
                      std::isfinite(r.e_n) && r.lambda_n > 0.0 &&
                      r.backtracks >= 0 && r.d_norm >= 0.0 &&
                      std::isfinite(r.f_x);
      if (!ok) {
        ++c.violations;
        if (c.passed) c.detail = "malformed record" + detail::at_iteration(r.n);
        c.passed = false;
      }
      prev_n = r.n;
    }
    add(std::move(c));
  }

  if (cfg.step_mode == StepMode::Adaptive) {
    const double rho_bound =
        (1.0 - cfg.mu) / ((1.0 + cfg.mu) * (1.0 + cfg.mu)) - 1e-12;
    AuditCheck rho{"rho-lower-bound", true, 0, ""};
    AuditCheck cap{"lambda-within-cap", true, 0, ""};
    AuditCheck dir{"direction-lower-bound", true, 0, ""};
    for (const auto& r : trace) {
      if (r.d_norm > 0.0 && r.rho_n < rho_bound) {
        ++rho.violations;
        if (rho.passed)
          rho.detail = "rho " + std::to_string(r.rho_n) +
                       " below bound" + detail::at_iteration(r.n);
        rho.passed = false;
      }
      if (r.lambda_n > cfg.sigma) {
        ++cap.violations;
        if (cap.passed)
          cap.detail = "lambda " + std::to_string(r.lambda_n) +
                       " above sigma" + detail::at_iteration(r.n);
        cap.passed = false;
      }
      if (r.d_norm < (1.0 - cfg.mu) * r.e_n - 1e-12) {
        ++dir.violations;
        if (dir.passed)
          dir.detail = "|d| " + std::to_string(r.d_norm) + " below (1-mu)|x-y|" +
                       detail::at_iteration(r.n);
        dir.passed = false;
      }
    }
    add(std::move(rho));
    add(std::move(cap));
    add(std::move(dir));
  } else {
    AuditCheck fixed{"lambda-equals-fixed-step", true, 0, ""};
    for (const auto& r : trace) {
      if (r.lambda_n != cfg.fixed_step || r.backtracks != 0) {
        ++fixed.violations;
        if (fixed.passed)
          fixed.detail = "step size deviates from tau" + detail::at_iteration(r.n);
        fixed.passed = false;
      }
    }
    add(std::move(fixed));
  }

  {
    AuditCheck c{"feasibility-chain", true, 0, ""};
    for (const auto& r : trace) {
      if (r.f_x > cfg.feas_tol) {
        ++c.violations;
        if (c.passed)
          c.detail = "f(x) = " + std::to_string(r.f_x) + " above tolerance" +
                     detail::at_iteration(r.n);
        c.passed = false;
      }
    }
    add(std::move(c));
  }

  if (iterates) {
    AuditCheck align{"iterates-aligned", true, 0, ""};
    if (iterates->size() != trace.size() + 1) {
      align.passed = false;
      align.violations = 1;
      align.detail = "expected " + std::to_string(trace.size() + 1) +
                     " iterates (one per record plus the final point), got " +
                     std::to_string(iterates->size());
    }
    const bool aligned = align.passed;
    add(std::move(align));

    if (aligned && known_solution) {
      const RealVector& xs = *known_solution;
      AuditCheck fejer{"fejer-monotone", true, 0, ""};
      AuditCheck energy{"energy-decrease", true, 0, ""};
      for (std::size_t i = 0; i + 1 < iterates->size(); ++i) {
        const double before = ((*iterates)[i] - xs).norm();
        const double after = ((*iterates)[i + 1] - xs).norm();
        if (after > before + 1e-10) {
          ++fejer.violations;
          if (fejer.passed)
            fejer.detail = "distance grew by " + std::to_string(after - before) +
                           detail::at_iteration(trace[i].n);
          fejer.passed = false;
        }
        const double drop = (2.0 - cfg.gamma) * cfg.gamma * trace[i].rho_n *
                            trace[i].rho_n * trace[i].d_norm * trace[i].d_norm;
        if (after * after > before * before - drop + 1e-8) {
          ++energy.violations;
          if (energy.passed)
            energy.detail = "energy inequality violated" +
                            detail::at_iteration(trace[i].n);
          energy.passed = false;
        }
      }
      add(std::move(fejer));
      add(std::move(energy));
    }
  }
  return report;
}

inline std::string to_text(const AuditReport& report) {
  std::ostringstream os;
  for (const auto& c : report.checks) {
    os << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.passed)
      os << " (" << c.violations << " violations: " << c.detail << ")";
    os << '\n';
  }
  return os.str();
}

inline std::string to_csv(const AuditReport& report) {
  std::ostringstream os;
  os << "check,passed,violations,detail\n";
  for (const auto& c : report.checks) {
    std::string detail = c.detail;
    std::replace(detail.begin(), detail.end(), ',', ';');
    os << c.name << ',' << (c.passed ? 1 : 0) << ',' << c.violations << ','
       << detail << '\n';
  }
  return os.str();
}

}  // namespace moball
