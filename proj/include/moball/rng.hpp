#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

namespace moball {

// Counter-based 64-bit stream (SplitMix64). Every random quantity in this
// library is derived from one of these streams so that a (seed, draw order)
// pair pins an instance bit-for-bit across machines.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller. Consumes exactly two raw draws per call
  // (no caching of the second deviate), keeping stream positions countable.
  double normal() {
    const double a = u01();
    const double b = u01();
    const double r = std::sqrt(-2.0 * std::log1p(-a));
    return r * std::cos(2.0 * M_PI * b);
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

// Column-major fill, one normal per entry.
inline Eigen::MatrixXd gaussian_matrix(SplitMix64& g, Eigen::Index rows,
                                       Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = g.normal();
  return m;
}

inline Eigen::VectorXd uniform_vector(SplitMix64& g, Eigen::Index n,
                                      double lo, double hi) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = lo + (hi - lo) * g.u01();
  return v;
}

}  // namespace moball
