#pragma once

// Compressed sparse row matrices and the two solvers the field problems
// need: a banded direct solver and Jacobi-preconditioned CG.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "pgdfit/errors.hpp"

namespace pgdfit {

using DenseVector = std::vector<double>;

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

class SparseMatrix {
public:
  SparseMatrix() = default;

  SparseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_ptr,
               std::vector<std::size_t> col_index, std::vector<double> values)
      : n_rows_(n_rows),
        n_cols_(n_cols),
        row_ptr_(std::move(row_ptr)),
        col_index_(std::move(col_index)),
        values_(std::move(values)) {
    require(row_ptr_.size() == n_rows_ + 1, "row_ptr must have n_rows + 1 entries");
    require(row_ptr_.front() == 0 && row_ptr_.back() == col_index_.size(),
            "row_ptr does not span the index array");
    require(col_index_.size() == values_.size(), "index/value length mismatch");
    for (std::size_t i = 0; i < n_rows_; ++i) {
      require(row_ptr_[i] <= row_ptr_[i + 1], "row_ptr must be non-decreasing");
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        require(col_index_[k] < n_cols_, "column index out of range");
        if (k > row_ptr_[i])
          require(col_index_[k - 1] < col_index_[k],
                  "column indices must be strictly increasing within a row");
      }
    }
  }

  /// Builds a matrix from unordered triplets; duplicates are summed in input order.
  static SparseMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                    std::vector<Triplet> triplets) {
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
      return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    std::vector<std::size_t> row_ptr(n_rows + 1, 0);
    std::vector<std::size_t> cols;
    std::vector<double> vals;
    cols.reserve(triplets.size());
    vals.reserve(triplets.size());
    for (std::size_t k = 0; k < triplets.size(); ++k) {
      const auto& t = triplets[k];
      require(t.row < n_rows && t.col < n_cols, "triplet index out of range");
      if (k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
        vals.back() += t.value;
        continue;
      }
      cols.push_back(t.col);
      vals.push_back(t.value);
      ++row_ptr[t.row + 1];
    }
    std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
    return SparseMatrix(n_rows, n_cols, std::move(row_ptr), std::move(cols), std::move(vals));
  }

  static SparseMatrix identity(std::size_t n) {
    std::vector<std::size_t> row_ptr(n + 1);
    std::vector<std::size_t> cols(n);
    std::iota(row_ptr.begin(), row_ptr.end(), std::size_t{0});
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    return SparseMatrix(n, n, std::move(row_ptr), std::move(cols), std::vector<double>(n, 1.0));
  }

  /// Symmetric tridiagonal Toeplitz matrix (sub, diag, sub).
  static SparseMatrix tridiagonal(std::size_t n, double off, double diag) {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) t.push_back({i, i - 1, off});
      t.push_back({i, i, diag});
      if (i + 1 < n) t.push_back({i, i + 1, off});
    }
    return from_triplets(n, n, std::move(t));
  }

  std::size_t rows() const noexcept { return n_rows_; }
  std::size_t cols() const noexcept { return n_cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }
  const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
  const std::vector<std::size_t>& col_index() const noexcept { return col_index_; }
  const std::vector<double>& values() const noexcept { return values_; }

  double at(std::size_t i, std::size_t j) const {
    require(i < n_rows_ && j < n_cols_, "index out of range");
    auto first = col_index_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    auto last = col_index_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - col_index_.begin())];
  }

  DenseVector diagonal() const {
    DenseVector d(std::min(n_rows_, n_cols_), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
    return d;
  }

  /// True if the sparsity pattern is symmetric (values may differ).
  bool is_structurally_symmetric() const {
    if (n_rows_ != n_cols_) return false;
    for (std::size_t i = 0; i < n_rows_; ++i)
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        const std::size_t j = col_index_[k];
        auto first = col_index_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[j]);
        auto last = col_index_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[j + 1]);
        if (!std::binary_search(first, last, i)) return false;
      }
    return true;
  }

  bool is_symmetric() const {
    if (!is_structurally_symmetric()) return false;
    for (std::size_t i = 0; i < n_rows_; ++i)
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
        if (values_[k] != at(col_index_[k], i)) return false;
    return true;
  }

  /// (lower, upper) bandwidth.
  std::pair<std::size_t, std::size_t> bandwidth() const {
    std::size_t lower = 0, upper = 0;
    for (std::size_t i = 0; i < n_rows_; ++i)
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        const std::size_t j = col_index_[k];
        if (j < i) lower = std::max(lower, i - j);
        else upper = std::max(upper, j - i);
      }
    return {lower, upper};
  }

private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_index_;
  std::vector<double> values_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require(x.size() == y.size(), "axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

inline DenseVector spmv(const SparseMatrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw ContractViolation("spmv: A.n_cols != x.length");
  DenseVector y(a.rows(), 0.0);
  const auto& rp = a.row_ptr();
  const auto& ci = a.col_index();
  const auto& v = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) s += v[k] * x[ci[k]];
    y[i] = s;
  }
  return y;
}

/// Banded LU without pivoting. Intended for the SPD / diagonally dominant
/// systems produced by the field discretizations; a pivot that collapses
/// relative to the largest diagonal entry is reported as singular.
inline DenseVector direct_solve(const SparseMatrix& a, std::span<const double> b) {
  if (a.rows() != a.cols()) throw ContractViolation("direct_solve: matrix not square");
  if (a.rows() != b.size()) throw ContractViolation("direct_solve: rhs length mismatch");
  const std::size_t n = a.rows();
  if (n == 0) return {};
  const auto [lower, upper] = a.bandwidth();
  const std::size_t width = lower + upper + 1;
  // band(i, j) stored at i * width + (j - i + lower)
  std::vector<double> band(n * width, 0.0);
  auto idx = [&](std::size_t i, std::size_t j) { return i * width + (j + lower - i); };
  const auto& rp = a.row_ptr();
  const auto& ci = a.col_index();
  const auto& v = a.values();
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      band[idx(i, ci[k])] = v[k];
      scale = std::max(scale, std::abs(v[k]));
    }
  if (scale == 0.0) throw SingularSystem("direct_solve: zero matrix");
  const double pivot_floor = 1e-14 * scale;

  for (std::size_t k = 0; k < n; ++k) {
    const double pivot = band[idx(k, k)];
    if (!(std::abs(pivot) > pivot_floor))
      throw SingularSystem("direct_solve: singular pivot at row " + std::to_string(k));
    const std::size_t i_end = std::min(n, k + lower + 1);
    const std::size_t j_end = std::min(n, k + upper + 1);
    for (std::size_t i = k + 1; i < i_end; ++i) {
      double& lik = band[idx(i, k)];
      if (lik == 0.0) continue;
      lik /= pivot;
      for (std::size_t j = k + 1; j < j_end; ++j) band[idx(i, j)] -= lik * band[idx(k, j)];
    }
  }

  DenseVector x(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j0 = i > lower ? i - lower : 0;
    for (std::size_t j = j0; j < i; ++j) x[i] -= band[idx(i, j)] * x[j];
  }
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t j_end = std::min(n, i + upper + 1);
    for (std::size_t j = i + 1; j < j_end; ++j) x[i] -= band[idx(i, j)] * x[j];
    x[i] /= band[idx(i, i)];
  }
  if (!all_finite(x)) throw SingularSystem("direct_solve: non-finite solution");
  return x;
}

struct CgStats {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

inline constexpr double default_cg_tolerance = 1e-12;

/// Jacobi-preconditioned conjugate gradients for SPD systems.
/// Converged when ||b - A x||_2 <= tol * ||b||_2 (true residual checked).
inline DenseVector cg_solve(const SparseMatrix& a, std::span<const double> b,
                            double tol = default_cg_tolerance, std::size_t max_iter = 10000,
                            CgStats* stats = nullptr) {
  if (a.rows() != a.cols()) throw ContractViolation("cg_solve: matrix not square");
  if (a.rows() != b.size()) throw ContractViolation("cg_solve: rhs length mismatch");
  if (!a.is_structurally_symmetric())
    throw ContractViolation("cg_solve: matrix is not structurally symmetric");
  const std::size_t n = b.size();
  DenseVector x(n, 0.0);
  const double b_norm = norm2(b);
  if (stats) *stats = {};
  if (b_norm == 0.0) return x;

  DenseVector inv_diag = a.diagonal();
  for (double& d : inv_diag) {
    if (!(d > 0.0)) throw ContractViolation("cg_solve: non-positive diagonal entry");
    d = 1.0 / d;
  }
  DenseVector r(b.begin(), b.end());
  DenseVector z(n), p(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  std::vector<double> trace;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    const DenseVector ap = spmv(a, p);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) throw ContractViolation("cg_solve: matrix is not positive definite");
    const double step = rz / pap;
    axpy(step, p, x);
    axpy(-step, ap, r);
    double rel = norm2(r) / b_norm;
    if (rel <= tol) {
      // guard against drift of the recursive residual
      DenseVector true_r(b.begin(), b.end());
      axpy(-1.0, spmv(a, x), true_r);
      rel = norm2(true_r) / b_norm;
      if (rel <= tol) {
        if (stats) *stats = {it, rel};
        return x;
      }
      r = std::move(true_r);
    }
    trace.push_back(rel);
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw MaxIterations("cg_solve: no convergence after " + std::to_string(max_iter) + " iterations",
                      std::move(trace));
}

}  // namespace pgdfit
