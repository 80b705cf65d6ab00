// Benchmark front end for the moving-ball solver library: builds seeded
// instances, runs solves, writes convergence traces, replays audits, and
// emits plot scripts for the trace files.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <moball/moball.hpp>

namespace {

using namespace moball;

struct RunFlags {
  std::string problem = "example1";
  int n = 0; // 0 = per-problem default
  std::uint64_t seed = 1;
  double cond_cap = 10.0;
  double mu = 0.01;
  double delta = 0.0005;
  double sigma = 7.0;
  double gamma = 0.99;
  double tol = 1e-12;
  int max_iter = 20000;
  double fixed_step = 0.0; // > 0 switches to fixed-step mode
  std::string out;
  std::string dump_iterates;
  std::string known_solution;
  int repeat = 1;
};

SolverConfig config_from(const RunFlags& f) {
  SolverConfig cfg;
  cfg.mu = f.mu;
  cfg.delta = f.delta;
  cfg.sigma = f.sigma;
  cfg.gamma = f.gamma;
  cfg.e_tol = f.tol;
  cfg.max_iter = f.max_iter;
  if (f.fixed_step > 0.0) {
    cfg.step_mode = StepMode::Fixed;
    cfg.fixed_step = f.fixed_step;
  }
  return cfg;
}

int default_n(const std::string& problem) {
  if (problem == "example1") return 4;
  if (problem == "example2") return 1000;
  return 5; // projection
}

// "dir/name.csv" -> "dir/name_seed7.csv"; used when --repeat fans out
std::string with_seed_suffix(const std::string& path, std::uint64_t seed) {
  const std::filesystem::path p(path);
  std::filesystem::path out = p.parent_path();
  out /= p.stem().string() + "_seed" + std::to_string(seed) +
         p.extension().string();
  return out.string();
}

struct WorkerResult {
  int code = 0;
  std::string summary;
  std::string error;
};

WorkerResult run_one(RunFlags f, std::uint64_t seed) {
  WorkerResult res;
  try {
    f.seed = seed;
    const int n = f.n > 0 ? f.n : default_n(f.problem);
    if (f.problem == "example1" && n != 4) {
      res.code = 1;
      res.error = "example1 is four-dimensional; --n must be 4 or omitted";
      return res;
    }

    InstanceSpec ispec;
    ispec.problem = f.problem;
    ispec.n = n;
    ispec.seed = seed;
    ispec.cond_cap = f.cond_cap;
    InstanceBundle bundle = materialize(ispec);

    long long op_evals = 0;
    {
      auto base = bundle.problem.op.eval;
      bundle.problem.op.eval = [&op_evals, base](const RealVector& x) {
        ++op_evals;
        return base(x);
      };
    }

    const SolverConfig cfg = config_from(f);
    std::vector<RealVector> iterates;
    SolveObserver observer;
    if (!f.dump_iterates.empty())
      observer = [&iterates](const IterateRecord&, const RealVector& x) {
        iterates.push_back(x);
      };

    const auto t0 = std::chrono::steady_clock::now();
    const SolveReport report = solve(bundle.problem, bundle.x1, cfg, observer);
    const double wall_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t0)
                               .count();

    if (!f.out.empty()) write_trace(f.out, report.trace);
    if (!f.dump_iterates.empty()) {
      std::ofstream os(f.dump_iterates);
      if (!os) throw ParseError("cannot open for writing: " + f.dump_iterates);
      for (const auto& x : iterates) write_vector_line(os, x);
      write_vector_line(os, report.solution);
    }
    if (!f.known_solution.empty()) {
      if (!bundle.problem.known_solution)
        throw SolveError("problem '" + f.problem +
                         "' has no known solution to write");
      write_vector(f.known_solution, *bundle.problem.known_solution);
    }

    const double final_e =
        report.trace.empty() ? std::numeric_limits<double>::quiet_NaN()
                             : report.trace.back().e_n;
    std::ostringstream os;
    os << "status=" << to_string(report.status)
       << " iterations=" << report.iterations << " final_e=" << g17(final_e)
       << " wall_ms=" << g17(wall_ms) << " op_evals=" << op_evals
       << " problem=" << f.problem << " n=" << n << " seed=" << seed
       << " cond_cap=" << g17(f.cond_cap)
       << " mode=" << (cfg.step_mode == StepMode::Fixed ? "fixed" : "adaptive")
       << " mu=" << g17(cfg.mu) << " delta=" << g17(cfg.delta)
       << " sigma=" << g17(cfg.sigma) << " gamma=" << g17(cfg.gamma)
       << " tol=" << g17(cfg.e_tol) << " max_iter=" << cfg.max_iter;
    if (cfg.step_mode == StepMode::Fixed)
      os << " fixed_step=" << g17(cfg.fixed_step);
    res.summary = os.str();

    switch (report.status) {
      case SolveStatus::Converged:
      case SolveStatus::StationaryOperator: res.code = 0; break;
      case SolveStatus::MaxIterations: res.code = 2; break;
      default: res.code = 3; break;
    }
  } catch (const InfeasiblePoint& e) {
    res.code = 1;
    res.error = e.what();
  } catch (const std::invalid_argument& e) {
    res.code = 1;
    res.error = e.what();
  } catch (const std::exception& e) {
    res.code = 3;
    res.error = e.what();
  }
  return res;
}

int cmd_run(const RunFlags& f) {
  if (f.repeat < 1) {
    std::cerr << "--repeat must be >= 1\n";
    return 1;
  }
  if (f.repeat == 1) {
    const WorkerResult res = run_one(f, f.seed);
    if (!res.error.empty()) std::cerr << "error: " << res.error << '\n';
    if (!res.summary.empty()) std::cout << res.summary << '\n';
    return res.code;
  }

  std::vector<WorkerResult> results(static_cast<std::size_t>(f.repeat));
  std::vector<std::thread> workers;
  workers.reserve(results.size());
  for (int i = 0; i < f.repeat; ++i) {
    workers.emplace_back([&f, &results, i] {
      RunFlags mine = f;
      const std::uint64_t seed = f.seed + static_cast<std::uint64_t>(i);
      if (!mine.out.empty()) mine.out = with_seed_suffix(mine.out, seed);
      if (!mine.dump_iterates.empty())
        mine.dump_iterates = with_seed_suffix(mine.dump_iterates, seed);
      if (!mine.known_solution.empty())
        mine.known_solution = with_seed_suffix(mine.known_solution, seed);
      results[static_cast<std::size_t>(i)] = run_one(mine, seed);
    });
  }
  for (auto& w : workers) w.join();

  int worst = 0;
  for (const auto& res : results) {
    if (!res.error.empty()) std::cerr << "error: " << res.error << '\n';
    if (!res.summary.empty()) std::cout << res.summary << '\n';
    worst = std::max(worst, res.code);
  }
  return worst;
}

struct AuditFlags {
  std::string trace;
  std::string dump_iterates;
  std::string known_solution;
  std::string out; // optional CSV report
  double mu = 0.01;
  double delta = 0.0005;
  double sigma = 7.0;
  double gamma = 0.99;
  double tol = 1e-12;
  int max_iter = 20000;
  double fixed_step = 0.0;
};

int cmd_audit(const AuditFlags& f) {
  std::vector<IterateRecord> trace;
  std::optional<RealVector> known;
  std::optional<std::vector<RealVector>> iterates;
  try {
    trace = read_trace(f.trace);
    if (!f.known_solution.empty()) known = read_vector(f.known_solution);
    if (!f.dump_iterates.empty()) iterates = read_iterates(f.dump_iterates);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  SolverConfig cfg;
  cfg.mu = f.mu;
  cfg.delta = f.delta;
  cfg.sigma = f.sigma;
  cfg.gamma = f.gamma;
  cfg.e_tol = f.tol;
  cfg.max_iter = f.max_iter;
  if (f.fixed_step > 0.0) {
    cfg.step_mode = StepMode::Fixed;
    cfg.fixed_step = f.fixed_step;
  }

  const AuditReport report =
      audit_trace(trace, cfg, known ? &*known : nullptr,
                  iterates ? &*iterates : nullptr);
  std::cout << to_text(report);
  if (!f.out.empty()) {
    std::ofstream os(f.out);
    if (!os) {
      std::cerr << "error: cannot open for writing: " << f.out << '\n';
      return 1;
    }
    os << to_csv(report);
  }
  std::cout << (report.passed() ? "AUDIT PASS" : "AUDIT FAIL") << '\n';
  return report.passed() ? 0 : 2;
}

int cmd_plot(const std::vector<std::string>& traces, const std::string& out) {
  if (traces.empty()) {
    std::cerr << "error: no trace files given\n";
    return 1;
  }
  for (const auto& t : traces) {
    std::ifstream probe(t);
    if (!probe) {
      std::cerr << "error: cannot read trace: " << t << '\n';
      return 1;
    }
  }
  std::ofstream os(out);
  if (!os) {
    std::cerr << "error: cannot open for writing: " << out << '\n';
    return 1;
  }
  const auto curve_list = [&traces](int xcol) {
    std::ostringstream s;
    for (std::size_t i = 0; i < traces.size(); ++i) {
      if (i) s << ", \\\n     ";
      const std::string title = std::filesystem::path(traces[i]).stem().string();
      s << '"' << traces[i] << "\" every ::1 using " << xcol
        << ":2 with lines title \"" << title << '"';
    }
    return s.str();
  };
  os << "# gnuplot script: residual curves for recorded solver traces\n"
     << "set datafile separator \",\"\n"
     << "set logscale y\n"
     << "set ylabel \"E_n\"\n"
     << "set term pngcairo size 900,600\n"
     << "set xlabel \"iteration\"\n"
     << "set output \"e_vs_iteration.png\"\n"
     << "plot " << curve_list(1) << "\n"
     << "set xlabel \"elapsed ms\"\n"
     << "set output \"e_vs_time.png\"\n"
     << "plot " << curve_list(8) << "\n";
  std::cout << "wrote " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moving-ball projection solver benchmark"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand("run", "solve an instance, write its trace");
  run->add_option("--problem", rf.problem, "instance family")
      ->check(CLI::IsMember({"example1", "example2", "projection"}))
      ->capture_default_str();
  run->add_option("--n", rf.n,
                  "dimension (defaults: example1 4, example2 1000, "
                  "projection 5)")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--seed", rf.seed, "instance seed")->capture_default_str();
  run->add_option("--cond-cap", rf.cond_cap,
                  "eigenvalue spread cap of the generated constraint")
      ->capture_default_str();
  run->add_option("--mu", rf.mu, "line-search acceptance factor")
      ->capture_default_str();
  run->add_option("--delta", rf.delta, "backtracking shrink factor")
      ->capture_default_str();
  run->add_option("--sigma", rf.sigma, "first trial step")
      ->capture_default_str();
  run->add_option("--gamma", rf.gamma, "correction relaxation")
      ->capture_default_str();
  run->add_option("--tol", rf.tol, "stop when E_n falls to this")
      ->capture_default_str();
  run->add_option("--max-iter", rf.max_iter, "iteration cap")
      ->capture_default_str();
  run->add_option("--fixed-step", rf.fixed_step,
                  "use this fixed step instead of the line search");
  run->add_option("--out", rf.out, "trace CSV path");
  run->add_option("--dump-iterates", rf.dump_iterates,
                  "write iterates (one per line, final point last)");
  run->add_option("--known-solution", rf.known_solution,
                  "write the instance's known solution here");
  run->add_option("--repeat", rf.repeat,
                  "run this many consecutive seeds concurrently")
      ->capture_default_str();

  AuditFlags af;
  auto* audit =
      app.add_subcommand("audit", "re-check the guarantees in a trace");
  audit->add_option("trace", af.trace, "trace CSV to audit")->required();
  audit->add_option("--dump-iterates", af.dump_iterates,
                    "iterate dump matching the trace");
  audit->add_option("--known-solution", af.known_solution,
                    "known solution vector file");
  audit->add_option("--out", af.out, "write the report as CSV here");
  audit->add_option("--mu", af.mu, "")->capture_default_str();
  audit->add_option("--delta", af.delta, "")->capture_default_str();
  audit->add_option("--sigma", af.sigma, "")->capture_default_str();
  audit->add_option("--gamma", af.gamma, "")->capture_default_str();
  audit->add_option("--tol", af.tol, "")->capture_default_str();
  audit->add_option("--max-iter", af.max_iter, "")->capture_default_str();
  audit->add_option("--fixed-step", af.fixed_step,
                    "audit against fixed-step mode");

  std::vector<std::string> plot_traces;
  std::string plot_out = "plot.gp";
  auto* plot =
      app.add_subcommand("plot", "emit a gnuplot script for trace CSVs");
  plot->add_option("traces", plot_traces, "trace CSV files");
  plot->add_option("--out", plot_out, "script path")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return cmd_run(rf);
    if (audit->parsed()) return cmd_audit(af);
    return cmd_plot(plot_traces, plot_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
