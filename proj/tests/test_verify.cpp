#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include <moball/problems.hpp>
#include <moball/solver.hpp>
#include <moball/verify.hpp>

using namespace moball;

namespace {

EllipsoidSpec sphere_spec(Eigen::Index n, double u) {
  EllipsoidSpec spec;
  spec.T = Eigen::MatrixXd::Identity(n, n);
  spec.t = RealVector::Zero(n);
  spec.u = u;
  spec.spectral_norm_T = 1.0;
  return spec;
}

RealVector vec2(double a, double b) {
  RealVector v(2);
  v << a, b;
  return v;
}

const AuditCheck& find_check(const AuditReport& report,
                             const std::string& name) {
  for (const auto& c : report.checks)
    if (c.name == name) return c;
  FAIL("missing check: " << name);
  static AuditCheck dummy;
  return dummy;
}

struct RunCapture {
  SolveReport report;
  std::vector<RealVector> iterates; // one per record, plus the final point
};

RunCapture run_with_iterates(const VIProblem& prob, const RealVector& x1,
                             const SolverConfig& cfg) {
  RunCapture cap;
  cap.report = solve(prob, x1, cfg,
                     [&](const IterateRecord&, const RealVector& x) {
                       cap.iterates.push_back(x);
                     });
  cap.iterates.push_back(cap.report.solution);
  return cap;
}

}  // namespace

TEST_CASE("certificate recognizes an interior stationary point", "[verify]") {
  auto spec = sphere_spec(2, 1.0);
  const RealVector p = vec2(0.2, -0.1);
  const auto prob = projection_problem(spec, p);
  const auto cert = kkt_certificate(prob, p, 1e-8);
  CHECK(cert.kind == CertificateKind::InteriorStationary);
  CHECK(cert.residual == 0.0);
}

TEST_CASE("certificate recognizes the sphere pole with unit multiplier",
          "[verify]") {
  auto spec = sphere_spec(2, 1.0);
  const auto prob = projection_problem(spec, vec2(2.0, 0.0));
  const auto cert = kkt_certificate(prob, vec2(1.0, 0.0), 1e-8);
  CHECK(cert.kind == CertificateKind::BoundaryKKT);
  CHECK(cert.eta == 1.0);
  CHECK(cert.residual == 0.0);
}

TEST_CASE("certificate accepts analytic answers and rejects nudged ones",
          "[verify]") {
  SplitMix64 g(777);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto inst = projection_instance(seed, 5, 10.0);
    REQUIRE(inst.problem.known_solution.has_value());
    const RealVector& star = *inst.problem.known_solution;
    const auto good = kkt_certificate(inst.problem, star, 1e-8);
    REQUIRE(good.kind != CertificateKind::Failed);

    RealVector dir(5);
    for (int i = 0; i < 5; ++i) dir[i] = g.normal();
    dir.normalize();
    const RealVector nudged = project_ellipsoid(
        inst.spec.T, inst.spec.t, inst.spec.u, star + 0.01 * dir);
    const auto bad = kkt_certificate(inst.problem, nudged, 1e-6);
    REQUIRE(bad.kind == CertificateKind::Failed);
    REQUIRE(bad.residual > 1e-6);
  }
}

TEST_CASE("certificate reports a clean failure off both regimes", "[verify]") {
  auto spec = sphere_spec(2, 1.0);
  VIProblem prob;
  prob.op.eval = [](const RealVector&) { return vec2(1.0, 0.0); };
  prob.constraint = ellipsoid_constraint(spec);
  prob.dim = 2;
  prob.slater_point = spec.t;
  const auto cert = kkt_certificate(prob, RealVector::Zero(2), 1e-6);
  CHECK(cert.kind == CertificateKind::Failed);
  // neither interior (|A| = 1) nor boundary (f = -1/2); the least-bad defect
  // is the interior one
  CHECK(cert.residual == 1.0);
}

TEST_CASE("certificate refuses a flat constraint on its boundary",
          "[verify]") {
  VIProblem prob;
  prob.op.eval = [](const RealVector&) { return vec2(1.0, 1.0); };
  prob.constraint.value = [](const RealVector&) { return 0.0; };
  prob.constraint.gradient = [](const RealVector& x) {
    return RealVector::Zero(x.size()).eval();
  };
  prob.constraint.lipschitz_grad = 1.0;
  prob.dim = 2;
  CHECK_THROWS_AS(kkt_certificate(prob, RealVector::Zero(2), 1e-6),
                  SolveError);
}

TEST_CASE("audit passes a fresh converging run end to end", "[verify]") {
  const auto inst = projection_instance(3, 5, 10.0);
  SolverConfig cfg;
  const auto cap = run_with_iterates(inst.problem, inst.spec.t, cfg);
  REQUIRE(cap.report.status == SolveStatus::Converged);
  const auto report =
      audit_trace(cap.report.trace, cfg, &*inst.problem.known_solution,
                  &cap.iterates);
  INFO(to_text(report));
  CHECK(report.passed());
  CHECK(report.checks.size() == 8);
  CHECK(find_check(report, "fejer-monotone").passed);
  CHECK(find_check(report, "energy-decrease").passed);
}

TEST_CASE("audit flags a doctored correction length", "[verify]") {
  const auto inst = projection_instance(3, 4, 10.0);
  SolverConfig cfg;
  auto report = solve(inst.problem, inst.spec.t, cfg);
  REQUIRE_FALSE(report.trace.empty());
  auto doctored = report.trace;
  doctored[0].rho_n = 0.5;
  const auto audit = audit_trace(doctored, cfg);
  CHECK_FALSE(audit.passed());
  const auto& check = find_check(audit, "rho-lower-bound");
  CHECK_FALSE(check.passed);
  CHECK(check.violations == 1);
  CHECK(check.detail.find("0.5") != std::string::npos);
}

TEST_CASE("audit flags out-of-order records", "[verify]") {
  const auto inst = projection_instance(3, 4, 10.0);
  SolverConfig cfg;
  auto report = solve(inst.problem, inst.spec.t, cfg);
  REQUIRE(report.trace.size() >= 2);
  auto doctored = report.trace;
  doctored[1].n = 5;
  const auto audit = audit_trace(doctored, cfg);
  CHECK_FALSE(find_check(audit, "records-well-formed").passed);
}

TEST_CASE("audit reports iterate misalignment instead of guessing",
          "[verify]") {
  const auto inst = projection_instance(3, 4, 10.0);
  SolverConfig cfg;
  const auto cap = run_with_iterates(inst.problem, inst.spec.t, cfg);
  auto truncated = cap.iterates;
  truncated.pop_back();
  const auto audit =
      audit_trace(cap.report.trace, cfg, &*inst.problem.known_solution,
                  &truncated);
  const auto& align = find_check(audit, "iterates-aligned");
  CHECK_FALSE(align.passed);
  // distance checks are withheld when alignment is broken
  for (const auto& c : audit.checks) {
    CHECK(c.name != "fejer-monotone");
    CHECK(c.name != "energy-decrease");
  }
}

TEST_CASE("audit catches a distance-to-solution regression", "[verify]") {
  const auto inst = projection_instance(3, 4, 10.0);
  SolverConfig cfg;
  auto cap = run_with_iterates(inst.problem, inst.spec.t, cfg);
  REQUIRE(cap.iterates.size() >= 3);
  cap.iterates[1].array() += 1.0; // push one iterate away from the solution
  const auto audit =
      audit_trace(cap.report.trace, cfg, &*inst.problem.known_solution,
                  &cap.iterates);
  CHECK_FALSE(find_check(audit, "fejer-monotone").passed);
}

TEST_CASE("fixed-step audit checks the configured step", "[verify]") {
  const auto inst = projection_instance(9, 4, 10.0);
  SolverConfig cfg;
  cfg.step_mode = StepMode::Fixed;
  cfg.fixed_step = 0.3;
  const auto report = solve(inst.problem, inst.spec.t, cfg);
  const auto audit = audit_trace(report.trace, cfg);
  INFO(to_text(audit));
  CHECK(audit.passed());
  CHECK(find_check(audit, "lambda-equals-fixed-step").passed);
  for (const auto& c : audit.checks) CHECK(c.name != "rho-lower-bound");

  auto doctored = report.trace;
  doctored[0].lambda_n = 0.4;
  CHECK_FALSE(
      find_check(audit_trace(doctored, cfg), "lambda-equals-fixed-step")
          .passed);
}

TEST_CASE("audit reports serialize to text and csv", "[verify]") {
  AuditReport report;
  report.checks.push_back({"alpha", true, 0, ""});
  report.checks.push_back({"beta", false, 2, "bad, very bad"});
  const std::string text = to_text(report);
  CHECK(text.find("PASS alpha") != std::string::npos);
  CHECK(text.find("FAIL beta (2 violations: bad, very bad)") !=
        std::string::npos);
  const std::string csv = to_csv(report);
  CHECK(csv.find("check,passed,violations,detail\n") == 0);
  CHECK(csv.find("alpha,1,0,\n") != std::string::npos);
  // embedded commas are swapped out to keep the row shape
  CHECK(csv.find("beta,0,2,bad; very bad\n") != std::string::npos);
}
