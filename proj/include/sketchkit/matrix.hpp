#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sketchkit/error.hpp"
#include "sketchkit/parallel.hpp"

namespace sketchkit {

// Dense row-major double matrix.  Finiteness of entries is validated at the
// construction/IO boundaries of public operations, not on every access.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  std::string shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
};

inline Matrix identity(std::size_t n) {
  Matrix m(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline bool all_finite(const Matrix& a) {
  for (double v : a.data())
    if (!std::isfinite(v)) return false;
  return true;
}

inline void require_finite(const Matrix& a, const char* what) {
  if (!all_finite(a)) throw error(std::string(what) + ": non-finite entry");
}

inline double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

inline double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data()) {
    const double av = std::fabs(v);
    if (av > m) m = av;
  }
  return m;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b))
    throw error("matrix subtract: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = a.data()[i] - b.data()[i];
  return c;
}

inline Matrix operator+(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b))
    throw error("matrix add: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = a.data()[i] + b.data()[i];
  return c;
}

// c = a * b.  Row-accumulation (i,k,j) order: each output row is a sum of
// scaled rows of b, taken in ascending k, so the result is independent of
// how rows are distributed over threads.
inline Matrix matmul(const Matrix& a, const Matrix& b, int threads = 1) {
  if (a.cols() != b.rows())
    throw error("matmul: dimension mismatch " + a.shape_str() + " * " + b.shape_str());
  Matrix c(a.rows(), b.cols(), 0.0);
  const std::size_t n = b.cols();
  parallel_for(a.rows(), threads, [&](std::size_t i) {
    double* ci = c.row(i);
    const double* ai = a.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = ai[k];
      if (aik == 0.0) continue;
      const double* bk = b.row(k);
      for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
  });
  return c;
}

// c = a * b^T.  Dot-product form; preferred when b is stored row-major and
// b^T is needed, e.g. gram matrices x * x^T.
inline Matrix matmul_nt(const Matrix& a, const Matrix& b, int threads = 1) {
  if (a.cols() != b.cols())
    throw error("matmul_nt: dimension mismatch " + a.shape_str() + " * " + b.shape_str() + "^T");
  Matrix c(a.rows(), b.rows(), 0.0);
  parallel_for(a.rows(), threads, [&](std::size_t i) {
    const double* ai = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* bj = b.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += ai[k] * bj[k];
      c(i, j) = s;
    }
  });
  return c;
}

}  // namespace sketchkit
