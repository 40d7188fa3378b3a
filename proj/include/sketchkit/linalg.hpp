#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "sketchkit/error.hpp"
#include "sketchkit/matrix.hpp"

namespace sketchkit {

inline void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols())
    throw error(std::string(what) + ": matrix is " + a.shape_str() + ", expected square");
}

// Symmetry is checked relative to the largest entry magnitude, then the input
// is symmetrized so the factorization sees an exactly symmetric matrix.
inline void require_symmetric(const Matrix& a, const char* what, double rel_tol = 1e-9) {
  require_square(a, what);
  const double scale = std::max(max_abs(a), 1e-300);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::fabs(a(i, j) - a(j, i)) > rel_tol * scale)
        throw error(std::string(what) + ": matrix not symmetric at (" + std::to_string(i) +
                    "," + std::to_string(j) + ")");
}

namespace detail {

// Lower-triangular factor L with L L^T = A, computed row-major with
// contiguous row dots.  Throws naming the failing pivot.
inline Matrix cholesky_lower(const Matrix& a) {
  const std::size_t n = a.rows();
  Matrix l(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* li = l.row(i);
    for (std::size_t j = 0; j <= i; ++j) {
      const double* lj = l.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < j; ++k) s += li[k] * lj[k];
      const double v = 0.5 * (a(i, j) + a(j, i)) - s;
      if (j == i) {
        if (!(v > 0.0))
          throw error("cholesky: not positive definite (pivot " + std::to_string(i) + ")");
        l(i, i) = std::sqrt(v);
      } else {
        l(i, j) = v / l(j, j);
      }
    }
  }
  return l;
}

}  // namespace detail

// Upper-triangular U with U^T U = A.
inline Matrix cholesky_upper(const Matrix& a) {
  require_symmetric(a, "cholesky");
  return transpose(detail::cholesky_lower(a));
}

// Inverse of a symmetric positive definite matrix via its Cholesky factor.
// Result is exactly symmetric (both triangles come from the same dots).
inline Matrix spd_inverse(const Matrix& a) {
  require_symmetric(a, "spd_inverse");
  const std::size_t n = a.rows();
  const Matrix l = detail::cholesky_lower(a);
  const Matrix u = transpose(l);
  // m = l^{-1}, built row by row against rows of u so all dots are contiguous.
  Matrix m(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double* mi = m.row(i);
    mi[i] = 1.0 / l(i, i);
    for (std::size_t jj = i; jj-- > 0;) {
      const double* uj = u.row(jj);
      double s = 0.0;
      for (std::size_t k = jj + 1; k <= i; ++k) s += mi[k] * uj[k];
      mi[jj] = -s / u(jj, jj);
    }
  }
  // a^{-1} = m^T m; entry (i,j) is a column dot, so transpose first.
  const Matrix mt = transpose(m);
  return matmul_nt(mt, mt);
}

struct Svd {
  Matrix u;               // m x r, orthonormal columns (zero where sigma is zero)
  std::vector<double> s;  // r singular values, descending
  Matrix v;               // n x r, orthonormal columns
};

// Truncated SVD via one-sided Jacobi rotations applied to the columns of a
// (stored as rows of the transpose so every inner loop is contiguous).
// Exact zero singular values keep zero columns in u.
inline Svd truncated_svd(const Matrix& a, std::size_t rank) {
  const std::size_t m = a.rows(), n = a.cols();
  const std::size_t minmn = m < n ? m : n;
  if (rank < 1 || rank > minmn)
    throw error("truncated_svd: rank " + std::to_string(rank) + " out of range for " +
                a.shape_str());
  require_finite(a, "truncated_svd");

  Matrix bt = transpose(a);  // rows = columns of a, length m
  Matrix vt = identity(n);   // rows = columns of the accumulated v
  const double tol = 1e-13;
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double worst = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double* bp = bt.row(p);
        double* bq = bt.row(q);
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          app += bp[k] * bp[k];
          aqq += bq[k] * bq[k];
          apq += bp[k] * bq[k];
        }
        if (app == 0.0 || aqq == 0.0) continue;
        const double rel = std::fabs(apq) / std::sqrt(app * aqq);
        if (rel > worst) worst = rel;
        if (rel <= tol) continue;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        double* vp = vt.row(p);
        double* vq = vt.row(q);
        for (std::size_t k = 0; k < m; ++k) {
          const double x = bp[k], y = bq[k];
          bp[k] = c * x - s * y;
          bq[k] = s * x + c * y;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double x = vp[k], y = vq[k];
          vp[k] = c * x - s * y;
          vq[k] = s * x + c * y;
        }
      }
    }
    if (worst <= tol) break;
  }

  std::vector<double> sigma(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    const double* bi = bt.row(i);
    for (std::size_t k = 0; k < m; ++k) s += bi[k] * bi[k];
    sigma[i] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  Svd out;
  out.u = Matrix(m, rank, 0.0);
  out.v = Matrix(n, rank, 0.0);
  out.s.resize(rank);
  for (std::size_t t = 0; t < rank; ++t) {
    const std::size_t idx = order[t];
    out.s[t] = sigma[idx];
    const double* bi = bt.row(idx);
    if (sigma[idx] > 0.0) {
      const double inv = 1.0 / sigma[idx];
      for (std::size_t i = 0; i < m; ++i) out.u(i, t) = bi[i] * inv;
    }
    const double* vi = vt.row(idx);
    for (std::size_t j = 0; j < n; ++j) out.v(j, t) = vi[j];
  }
  return out;
}

// u * diag(s) * v^T for a truncated factorization.
inline Matrix svd_reconstruct(const Svd& f) {
  Matrix us = f.u;
  for (std::size_t i = 0; i < us.rows(); ++i)
    for (std::size_t t = 0; t < us.cols(); ++t) us(i, t) *= f.s[t];
  return matmul_nt(us, f.v);
}

}  // namespace sketchkit
