#pragma once
// Power-law spectrum model for a square update matrix: closed-form errors of
// the best low-rank approximation and of random-fold sketching under a matched
// parameter budget, the crossover coefficient where the two methods tie, and a
// Monte-Carlo harness that measures the fold error on synthesized matrices.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sketchkit/error.hpp"
#include "sketchkit/matrix.hpp"
#include "sketchkit/parallel.hpp"
#include "sketchkit/rng.hpp"

namespace sketchkit {

// Square n x n update whose squared singular values decay as rho_i^2 = i^-eta,
// compressed by an integer factor alpha.  The fold construction needs alpha to
// divide n so every bucket holds exactly alpha positions.
struct PowerLawSpec {
  std::size_t n = 0;
  double eta = 0.0;
  std::size_t alpha = 1;

  void validate() const {
    if (n == 0) throw error("power-law spec: n must be positive");
    if (!(eta >= 0.0 && eta < 1.0))
      throw error("power-law spec: eta must lie in [0, 1), got " + std::to_string(eta));
    if (alpha == 0) throw error("power-law spec: alpha must be a positive integer");
    if (n % alpha != 0)
      throw error("power-law spec: alpha " + std::to_string(alpha) + " does not divide n " +
                  std::to_string(n));
  }
};

// Sum of the squared spectrum: sum_{i=1..n} i^-eta.  Terms are added from the
// smallest up so the result is stable for large n.
inline double spectrum_sum(std::size_t n, double eta) {
  double total = 0.0;
  for (std::size_t i = n; i >= 1; --i) total += std::pow(static_cast<double>(i), -eta);
  return total;
}

// Integral bounds that bracket spectrum_sum:
//   ((n+1)^(1-eta) - 1)/(1-eta)  <  sum  <  1 + (n^(1-eta) - 1)/(1-eta)
// strictly for eta in (0, 1); at eta = 0 both sides collapse onto the sum n.
inline double spectrum_sum_lower_bound(std::size_t n, double eta) {
  return (std::pow(static_cast<double>(n) + 1.0, 1.0 - eta) - 1.0) / (1.0 - eta);
}
inline double spectrum_sum_upper_bound(std::size_t n, double eta) {
  return 1.0 + (std::pow(static_cast<double>(n), 1.0 - eta) - 1.0) / (1.0 - eta);
}

// Squared error of the best rank-(n/(2*alpha)) approximation: the spectrum
// tail beyond the retained rank.  The rank budget charges each retained
// singular triple a left and a right factor, hence the 2 in the divisor.
inline double lowrank_error_theory(const PowerLawSpec& spec) {
  spec.validate();
  if (spec.n < 2 * spec.alpha)
    throw error("lowrank_error_theory: need n >= 2*alpha for a rank of at least 1 (n=" +
                std::to_string(spec.n) + ", alpha=" + std::to_string(spec.alpha) + ")");
  const std::size_t rank = spec.n / (2 * spec.alpha);
  double tail = 0.0;
  for (std::size_t i = spec.n; i > rank; --i) tail += std::pow(static_cast<double>(i), -spec.eta);
  return tail;
}

// Expected squared error of balanced signed random-fold sketching at
// compression alpha: (alpha - 1)/alpha times the total spectrum mass.
inline double sketch_error_theory(const PowerLawSpec& spec) {
  spec.validate();
  const double a = static_cast<double>(spec.alpha);
  return (a - 1.0) / a * spectrum_sum(spec.n, spec.eta);
}

// Decay coefficient at which the two expected errors tie for large n:
// eta* = 1 - log(alpha)/log(2*alpha).  Below it sketching wins.  alpha = 1
// returns 1: with no compression the sketch error is zero on the whole range.
inline double crossover_eta(std::size_t alpha) {
  if (alpha == 0) throw error("crossover_eta: alpha must be a positive integer");
  if (alpha == 1) return 1.0;
  const double a = static_cast<double>(alpha);
  return 1.0 - std::log(a) / std::log(2.0 * a);
}

// Balanced signed bucket-averaging estimator: a uniformly random permutation
// of the n positions is chopped into n/alpha consecutive buckets of exactly
// alpha entries, and every position gets an independent +-1 sign.  A vector
// delta is estimated by delta_s[i] = g(i) * (sum_{j in i's bucket} g(j) *
// delta[j]) / alpha, an orthogonal projection onto the signed bucket
// indicator vectors.
struct RandomFoldSketch {
  std::size_t n = 0;
  std::size_t alpha = 1;
  std::vector<std::uint32_t> bucket;  // bucket id per position, n entries
  std::vector<double> sign;           // +1.0 or -1.0 per position, n entries
};

// Draw order: first the permutation (one draw per Fisher-Yates step, front to
// back), then the n signs (high bit of one draw each).
inline RandomFoldSketch make_random_fold(std::size_t n, std::size_t alpha, Rng& rng) {
  if (n == 0 || alpha == 0 || n % alpha != 0)
    throw error("random fold: alpha must be a positive integer dividing n (n=" +
                std::to_string(n) + ", alpha=" + std::to_string(alpha) + ")");
  std::vector<std::uint32_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<std::uint32_t>(i);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
    std::swap(perm[i], perm[j]);
  }
  RandomFoldSketch fold;
  fold.n = n;
  fold.alpha = alpha;
  fold.bucket.assign(n, 0);
  for (std::size_t pos = 0; pos < n; ++pos)
    fold.bucket[perm[pos]] = static_cast<std::uint32_t>(pos / alpha);
  fold.sign.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) fold.sign[i] = (rng.next_u64() >> 63) ? -1.0 : 1.0;
  return fold;
}

inline std::vector<double> fold_apply_row(const RandomFoldSketch& fold,
                                          const std::vector<double>& row) {
  if (row.size() != fold.n)
    throw error("fold: row has " + std::to_string(row.size()) + " entries, fold expects " +
                std::to_string(fold.n));
  std::vector<double> acc(fold.n / fold.alpha, 0.0);
  for (std::size_t i = 0; i < fold.n; ++i) acc[fold.bucket[i]] += fold.sign[i] * row[i];
  const double inv = 1.0 / static_cast<double>(fold.alpha);
  std::vector<double> out(fold.n);
  for (std::size_t i = 0; i < fold.n; ++i) out[i] = fold.sign[i] * acc[fold.bucket[i]] * inv;
  return out;
}

namespace detail {

// n x n matrix with orthonormal rows: i.i.d. Gaussian entries followed by
// modified Gram-Schmidt over the rows.  Gaussian rows are independent with
// probability one, so a degenerate pivot only signals a broken generator.
inline Matrix random_orthonormal_rows(std::size_t n, Rng& rng) {
  Matrix q(n, n);
  for (std::size_t i = 0; i < q.size(); ++i) q.data()[i] = rng.next_gaussian();
  for (std::size_t i = 0; i < n; ++i) {
    double* qi = q.row(i);
    for (std::size_t p = 0; p < i; ++p) {
      const double* qp = q.row(p);
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += qi[j] * qp[j];
      for (std::size_t j = 0; j < n; ++j) qi[j] -= dot * qp[j];
    }
    double norm2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) norm2 += qi[j] * qi[j];
    const double norm = std::sqrt(norm2);
    if (!(norm > 1e-12)) throw error("random orthonormal basis: degenerate draw");
    const double inv = 1.0 / norm;
    for (std::size_t j = 0; j < n; ++j) qi[j] *= inv;
  }
  return q;
}

}  // namespace detail

// Squared fold residuals of random orthonormal bases, one basis and one fold
// per trial: entry (t, l) is ||q_l - fold(q_l)||^2 for basis row l of trial t.
// Because the folded matrix is U diag(rho) V^T with the fold acting on the V
// side and U orthogonal, ||Delta - Delta_s||_F^2 = sum_l rho_l^2 * (t, l) for
// ANY spectrum rho — one profile serves a whole eta grid without resampling.
// Trial t draws from its own generator seeded with seed XOR t (basis first,
// then the fold), so results do not depend on the thread count.
inline Matrix fold_residual_profile(std::size_t n, std::size_t alpha, std::size_t trials,
                                    std::uint64_t seed, int threads = 1) {
  if (trials == 0) throw error("fold profile: trials must be at least 1");
  if (n == 0 || alpha == 0 || n % alpha != 0)
    throw error("fold profile: alpha must be a positive integer dividing n (n=" +
                std::to_string(n) + ", alpha=" + std::to_string(alpha) + ")");
  Matrix prof(trials, n);
  parallel_for(trials, threads, [&](std::size_t t) {
    Rng rng(seed ^ static_cast<std::uint64_t>(t));
    const Matrix q = detail::random_orthonormal_rows(n, rng);
    const RandomFoldSketch fold = make_random_fold(n, alpha, rng);
    std::vector<double> acc(n / alpha);
    const double inv = 1.0 / static_cast<double>(alpha);
    for (std::size_t l = 0; l < n; ++l) {
      const double* row = q.row(l);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) acc[fold.bucket[i]] += fold.sign[i] * row[i];
      double r2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = row[i] - fold.sign[i] * acc[fold.bucket[i]] * inv;
        r2 += d * d;
      }
      prof(t, l) = r2;
    }
  });
  return prof;
}

struct McFoldResult {
  double sketch_mean = 0.0;   // mean of ||Delta - Delta_s||_F^2 over trials
  double sketch_std = 0.0;    // sample standard deviation (0 when trials < 2)
  double lowrank_exact = 0.0; // exact spectrum-tail error at rank n/(2*alpha)
};

// Weights an eta-independent residual profile by the power-law spectrum.
// Row t of `profile` must hold squared fold residuals of an orthonormal basis
// (see fold_residual_profile) built for the same n and alpha.
inline McFoldResult monte_carlo_fold_from_profile(const Matrix& profile,
                                                  const PowerLawSpec& spec) {
  spec.validate();
  if (profile.rows() == 0 || profile.cols() != spec.n)
    throw error("fold profile: expected a non-empty profile with " + std::to_string(spec.n) +
                " columns, got " + profile.shape_str());
  const std::size_t trials = profile.rows();
  std::vector<double> rho2(spec.n);
  for (std::size_t l = 0; l < spec.n; ++l)
    rho2[l] = std::pow(static_cast<double>(l + 1), -spec.eta);
  std::vector<double> err(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    double e = 0.0;
    for (std::size_t l = 0; l < spec.n; ++l) e += rho2[l] * profile(t, l);
    err[t] = e;
  }
  McFoldResult res;
  double sum = 0.0;
  for (std::size_t t = 0; t < trials; ++t) sum += err[t];
  res.sketch_mean = sum / static_cast<double>(trials);
  if (trials >= 2) {
    double ss = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      const double d = err[t] - res.sketch_mean;
      ss += d * d;
    }
    res.sketch_std = std::sqrt(ss / static_cast<double>(trials - 1));
  }
  res.lowrank_exact = lowrank_error_theory(spec);
  return res;
}

// Synthesizes Delta = U diag(rho) V^T per trial implicitly (the orthogonal U
// never enters the Frobenius norm), folds it, and averages the squared error.
inline McFoldResult monte_carlo_fold(const PowerLawSpec& spec, std::size_t trials,
                                     std::uint64_t seed, int threads = 1) {
  spec.validate();
  const Matrix profile = fold_residual_profile(spec.n, spec.alpha, trials, seed, threads);
  return monte_carlo_fold_from_profile(profile, spec);
}

// Explicit n x n matrix with squared singular values i^-eta and independent
// uniformly random left and right singular bases (left basis drawn first).
inline Matrix synth_powerlaw_matrix(std::size_t n, double eta, Rng& rng, int threads = 1) {
  if (n == 0) throw error("powerlaw matrix: n must be positive");
  if (!(eta >= 0.0 && eta < 1.0))
    throw error("powerlaw matrix: eta must lie in [0, 1), got " + std::to_string(eta));
  const Matrix qu = detail::random_orthonormal_rows(n, rng);
  const Matrix qv = detail::random_orthonormal_rows(n, rng);
  Matrix scaled(n, n);
  for (std::size_t l = 0; l < n; ++l) {
    const double rho = std::pow(static_cast<double>(l + 1), -eta / 2.0);
    const double* src = qv.row(l);
    double* dst = scaled.row(l);
    for (std::size_t j = 0; j < n; ++j) dst[j] = rho * src[j];
  }
  return matmul(transpose(qu), scaled, threads);
}

}  // namespace sketchkit
