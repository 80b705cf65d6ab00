#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "problems.hpp"
#include "solver.hpp"

namespace moball {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 17 significant digits: enough to round-trip any double exactly.
inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr const char* kTraceHeader =
    "iter,e_n,lambda_n,rho_n,d_norm,f_x,backtracks,elapsed_ms";

inline void write_trace(std::ostream& os,
                        const std::vector<IterateRecord>& trace) {
  os << kTraceHeader << '\n';
  for (const auto& r : trace)
    os << r.n << ',' << g17(r.e_n) << ',' << g17(r.lambda_n) << ','
       << g17(r.rho_n) << ',' << g17(r.d_norm) << ',' << g17(r.f_x) << ','
       << r.backtracks << ',' << g17(r.elapsed_ms) << '\n';
}

inline void write_trace(const std::string& path,
                        const std::vector<IterateRecord>& trace) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot open for writing: " + path);
  write_trace(os, trace);
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(field);
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  out.push_back(field);
  return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ParseError(where + ": not a number: '" + s + "'");
  return v;
}

inline long parse_long(const std::string& s, const std::string& where) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const long v = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0')
    throw ParseError(where + ": not an integer: '" + s + "'");
  return v;
}

}  // namespace detail

inline std::vector<IterateRecord> read_trace(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open trace: " + path);
  std::string line;
  if (!std::getline(is, line) || line != kTraceHeader)
    throw ParseError("trace parse error at line 1: bad or missing header in " +
                     path);
  std::vector<IterateRecord> trace;
  long line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where =
        "trace parse error at line " + std::to_string(line_no);
    const auto f = detail::split_csv(line);
    if (f.size() != 8)
      throw ParseError(where + ": expected 8 fields, got " +
                       std::to_string(f.size()));
    IterateRecord r;
    r.n = static_cast<int>(detail::parse_long(f[0], where));
    r.e_n = detail::parse_double(f[1], where);
    r.lambda_n = detail::parse_double(f[2], where);
    r.rho_n = detail::parse_double(f[3], where);
    r.d_norm = detail::parse_double(f[4], where);
    r.f_x = detail::parse_double(f[5], where);
    r.backtracks = static_cast<int>(detail::parse_long(f[6], where));
    r.elapsed_ms = detail::parse_double(f[7], where);
    trace.push_back(r);
  }
  return trace;
}

inline void write_vector_line(std::ostream& os, const RealVector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ' ';
    os << g17(v[i]);
  }
  os << '\n';
}

inline void write_vector(const std::string& path, const RealVector& v) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot open for writing: " + path);
  write_vector_line(os, v);
}

inline RealVector parse_vector_line(const std::string& line,
                                    const std::string& where) {
  std::istringstream is(line);
  std::vector<double> vals;
  std::string tok;
  while (is >> tok) vals.push_back(detail::parse_double(tok, where));
  RealVector v(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = vals[i];
  return v;
}

// Single vector: all numbers in the file, any whitespace layout.
inline RealVector read_vector(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open vector file: " + path);
  std::stringstream whole;
  whole << is.rdbuf();
  RealVector v = parse_vector_line(whole.str(), "vector file " + path);
  if (v.size() == 0) throw ParseError("vector file is empty: " + path);
  return v;
}

// One iterate per line, space-separated.
inline std::vector<RealVector> read_iterates(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open iterate dump: " + path);
  std::vector<RealVector> out;
  std::string line;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    out.push_back(parse_vector_line(
        line, "iterate dump line " + std::to_string(line_no)));
  }
  return out;
}

// Instance description: either generator form (seed + cond_cap, replayed
// through the seeded generator) or explicit form (T, t, u spelled out).
struct InstanceSpec {
  std::string problem; // example1 | example2 | projection
  Eigen::Index n = 0;
  std::optional<std::uint64_t> seed;
  double cond_cap = 10.0;
  std::optional<EllipsoidSpec> explicit_set;
  std::optional<RealVector> p; // projection target, explicit form only
};

inline void save_instance(const std::string& path, const InstanceSpec& spec) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot open for writing: " + path);
  os << "problem " << spec.problem << '\n';
  os << "n " << spec.n << '\n';
  if (spec.seed) {
    os << "seed " << *spec.seed << '\n';
    os << "cond_cap " << g17(spec.cond_cap) << '\n';
  } else if (spec.explicit_set) {
    const auto& e = *spec.explicit_set;
    os << "T";
    for (Eigen::Index i = 0; i < e.T.rows(); ++i)
      for (Eigen::Index j = 0; j < e.T.cols(); ++j) os << ' ' << g17(e.T(i, j));
    os << '\n';
    os << "t";
    for (Eigen::Index i = 0; i < e.t.size(); ++i) os << ' ' << g17(e.t[i]);
    os << '\n';
    os << "u " << g17(e.u) << '\n';
    if (spec.p) {
      os << "p";
      for (Eigen::Index i = 0; i < spec.p->size(); ++i)
        os << ' ' << g17((*spec.p)[i]);
      os << '\n';
    }
  } else {
    throw ParseError("instance spec has neither seed nor explicit set");
  }
}

inline InstanceSpec load_instance(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open instance file: " + path);
  InstanceSpec spec;
  RealVector T_flat, t_vec;
  std::optional<double> u_val;
  std::string line;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const std::string where =
        "instance file line " + std::to_string(line_no);
    const auto space = line.find(' ');
    if (space == std::string::npos)
      throw ParseError(where + ": expected 'key value'");
    const std::string key = line.substr(0, space);
    const std::string val = line.substr(space + 1);
    if (key == "problem") {
      spec.problem = val;
    } else if (key == "n") {
      spec.n = detail::parse_long(val, where);
    } else if (key == "seed") {
      spec.seed = static_cast<std::uint64_t>(
          std::strtoull(val.c_str(), nullptr, 10));
    } else if (key == "cond_cap") {
      spec.cond_cap = detail::parse_double(val, where);
    } else if (key == "T") {
      T_flat = parse_vector_line(val, where);
    } else if (key == "t") {
      t_vec = parse_vector_line(val, where);
    } else if (key == "u") {
      u_val = detail::parse_double(val, where);
    } else if (key == "p") {
      spec.p = parse_vector_line(val, where);
    } else {
      throw ParseError(where + ": unknown key '" + key + "'");
    }
  }
  if (spec.problem.empty()) throw ParseError("instance file missing 'problem'");
  if (spec.n < 1) throw ParseError("instance file missing or bad 'n'");
  if (!spec.seed) {
    if (T_flat.size() != spec.n * spec.n || t_vec.size() != spec.n || !u_val)
      throw ParseError(
          "instance file needs either a seed or complete T/t/u arrays");
    EllipsoidSpec e;
    e.T = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                         Eigen::Dynamic, Eigen::RowMajor>>(
        T_flat.data(), spec.n, spec.n);
    e.t = t_vec;
    e.u = *u_val;
    e.spectral_norm_T = spectral_norm(e.T);
    spec.explicit_set = std::move(e);
  }
  return spec;
}

// Build the runnable problem an InstanceSpec describes. Returns the problem,
// the constraint data, and the canonical start point (the ellipsoid center).
struct InstanceBundle {
  VIProblem problem;
  EllipsoidSpec set;
  RealVector x1;
};

inline InstanceBundle materialize(const InstanceSpec& spec) {
  InstanceBundle b;
  if (spec.problem == "projection" && spec.seed) {
    ProjectionInstance inst =
        projection_instance(*spec.seed, spec.n, spec.cond_cap);
    b.set = std::move(inst.spec);
    b.problem = std::move(inst.problem);
  } else {
    if (spec.seed)
      b.set = random_ellipsoid(*spec.seed, spec.n, spec.cond_cap);
    else if (spec.explicit_set)
      b.set = *spec.explicit_set;
    else
      throw ParseError("instance spec has neither seed nor explicit set");
    if (spec.problem == "example1")
      b.problem = example1(b.set);
    else if (spec.problem == "example2")
      b.problem = example2(spec.n, b.set);
    else if (spec.problem == "projection") {
      if (!spec.p)
        throw ParseError("explicit projection instance needs 'p'");
      b.problem = projection_problem(b.set, *spec.p);
    } else {
      throw ParseError("unknown problem '" + spec.problem + "'");
    }
  }
  b.x1 = b.set.t;
  return b;
}

}  // namespace moball
