#pragma once

// Seeded generators for the property tests.

#include <cstddef>
#include <random>
#include <vector>

#include "pgdfit/linalg.hpp"

namespace testing_support {

class Gen {
public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  std::vector<double> vector(std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform(lo, hi);
    return v;
  }
  std::vector<double> increasing(std::size_t n, double lo, double max_step) {
    std::vector<double> v(n);
    double x = lo;
    for (auto& y : v) {
      y = x;
      x += uniform(0.1 * max_step, max_step);
    }
    return v;
  }

  /// Diagonally dominant symmetric tridiagonal matrix.
  pgdfit::SparseMatrix spd_tridiagonal(std::size_t n) {
    std::vector<pgdfit::Triplet> t;
    std::vector<double> off(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) off[i] = uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      double d = uniform(0.1, 1.0);
      if (i > 0) d += std::abs(off[i - 1]);
      if (i + 1 < n) d += std::abs(off[i]);
      t.push_back({i, i, d});
      if (i + 1 < n) {
        t.push_back({i, i + 1, off[i]});
        t.push_back({i + 1, i, off[i]});
      }
    }
    return pgdfit::SparseMatrix::from_triplets(n, n, t);
  }

private:
  std::mt19937_64 rng_;
};

}  // namespace testing_support
