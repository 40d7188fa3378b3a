#pragma once
// Compares the two compression families on a weight update Delta = W' - W:
// the optimal rank-r truncation error versus the error of projecting Delta
// onto the cluster-constant subspace of a learned sketch mapping, with both
// methods granted matching parameter budgets.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sketchkit/calibration.hpp"
#include "sketchkit/error.hpp"
#include "sketchkit/linalg.hpp"
#include "sketchkit/matrix.hpp"
#include "sketchkit/sketch_config.hpp"
#include "sketchkit/sketch_learner.hpp"
#include "sketchkit/sketched_matrix.hpp"

namespace sketchkit {

// || Delta - SVD_rank(Delta) ||_F / || Delta ||_F, the residual of the best
// rank-`rank` approximation.
inline double lowrank_delta_error(const Matrix& delta, std::size_t rank) {
  const std::size_t minmn = std::min(delta.rows(), delta.cols());
  if (rank < 1 || rank > minmn)
    throw error("lowrank_delta_error: rank " + std::to_string(rank) + " out of range [1, " +
                std::to_string(minmn) + "]");
  const double den = frobenius_norm(delta);
  if (den == 0.0) throw error("lowrank_delta_error: zero update has undefined normalization");
  const Svd f = truncated_svd(delta, rank);
  return frobenius_norm(delta - svd_reconstruct(f)) / den;
}

// Orthogonal projection of delta onto the subspace of matrices that are
// constant on each mapping cluster: within every row group, positions sharing
// an index value are replaced by their plain (unweighted) mean.
inline Matrix sketch_delta_project(const Matrix& delta, const SketchedMatrix& sm) {
  if (delta.rows() != sm.rows || delta.cols() != sm.cols)
    throw error("sketch_delta_error: update is " + delta.shape_str() + ", mapping expects " +
                std::to_string(sm.rows) + "x" + std::to_string(sm.cols));
  const std::size_t glen = sm.group_len();
  const std::size_t k = static_cast<std::size_t>(sm.cfg.k());
  Matrix hat(delta.rows(), delta.cols());
  std::vector<double> sum(k);
  std::vector<std::size_t> cnt(k);
  for (std::size_t i = 0; i < delta.rows(); ++i) {
    const std::uint8_t* idx = sm.indices.data() + i * sm.cols;
    const double* src = delta.row(i);
    double* dst = hat.row(i);
    for (std::size_t g = 0; g < static_cast<std::size_t>(sm.cfg.gpr); ++g) {
      const std::size_t base = g * glen;
      std::fill(sum.begin(), sum.end(), 0.0);
      std::fill(cnt.begin(), cnt.end(), std::size_t{0});
      for (std::size_t j = 0; j < glen; ++j) {
        const std::size_t label = idx[base + j];
        sum[label] += src[base + j];
        ++cnt[label];
      }
      for (std::size_t j = 0; j < glen; ++j) {
        const std::size_t label = idx[base + j];
        dst[base + j] = sum[label] / static_cast<double>(cnt[label]);
      }
    }
  }
  return hat;
}

// || Delta - Delta_hat ||_F / || Delta ||_F where Delta_hat is the projection
// above: the best update expressible by tuning the sketched values while the
// index mapping stays frozen.
inline double sketch_delta_error(const Matrix& delta, const SketchedMatrix& sm) {
  const double den = frobenius_norm(delta);
  if (delta.rows() == sm.rows && delta.cols() == sm.cols && den == 0.0)
    throw error("sketch_delta_error: zero update has undefined normalization");
  const Matrix hat = sketch_delta_project(delta, sm);
  return frobenius_norm(delta - hat) / den;
}

// Budget bookkeeping for one requested compression ratio in a sweep.
struct SweepChoice {
  double ratio = 0.0;          // requested original/compressed float ratio
  std::size_t rank = 0;        // low-rank rank; 0 means the budget affords none
  int bits = 0;                // sketch index width chosen
  int gpr = 0;                 // sketch groups per row chosen
  double sketch_ratio = 0.0;   // ratio the chosen sketch actually achieves
};

struct DeltaReport {
  std::vector<double> compression_ratios;
  std::vector<double> lowrank_err;
  std::vector<double> sketch_err;
  std::string matrix_id;
  std::vector<SweepChoice> choices;   // one per ratio, same order
  std::string accounting;             // the exact budget formulas used
};

// For each requested ratio alpha: the low-rank side gets rank =
// floor((rows*cols/alpha) / (rows+cols)) from charging rank*(rows+cols)
// floats; the sketch side searches bits in {2,3,4} and gpr over divisors of
// cols (with palette size 2^bits capped by the group length) for the
// parameter count rows*gpr*2^bits + rows*cols*bits/32 closest to the budget,
// breaking ties toward the larger trainable palette.  The mapping is learned
// by sketching the base W — never Delta — so the mapping is blind to the
// update it is later asked to express.
inline DeltaReport compare_sweep(const Matrix& w, const Matrix& w_prime, const HessianFactor& hf,
                                 const std::vector<double>& ratios, std::uint64_t seed = 0,
                                 int threads = 1) {
  if (w.rows() != w_prime.rows() || w.cols() != w_prime.cols())
    throw error("compare_sweep: base is " + w.shape_str() + ", tuned is " + w_prime.shape_str());
  if (ratios.empty()) throw error("compare_sweep: empty ratio list");
  const Matrix delta = w_prime - w;
  if (frobenius_norm(delta) == 0.0)
    throw error("compare_sweep: zero update has undefined normalization");
  const std::size_t r = w.rows(), c = w.cols();

  DeltaReport rep;
  rep.matrix_id = w.shape_str();
  rep.accounting =
      "budget floats = rows*cols/ratio; low-rank floats = rank*(rows+cols); "
      "sketch floats = rows*gpr*2^bits + rows*cols*bits/32";
  for (const double alpha : ratios) {
    if (!(alpha >= 1.0) || !std::isfinite(alpha))
      throw error("compare_sweep: ratio must be a finite value >= 1, got " +
                  std::to_string(alpha));
    const double budget = static_cast<double>(r) * static_cast<double>(c) / alpha;

    SweepChoice choice;
    choice.ratio = alpha;
    choice.rank =
        static_cast<std::size_t>(std::floor(budget / static_cast<double>(r + c)));
    // A rank-0 budget affords no singular triple; the best rank-0 approximant
    // is the zero matrix, whose normalized residual is exactly 1.
    const double lr_err = choice.rank >= 1 ? lowrank_delta_error(delta, choice.rank) : 1.0;

    double best_gap = 0.0;
    std::size_t best_capacity = 0;
    bool found = false;
    for (const int bits : {2, 3, 4}) {
      const std::size_t k = std::size_t{1} << bits;
      for (std::size_t gpr = 1; gpr <= c; ++gpr) {
        if (c % gpr != 0) continue;
        if (k > c / gpr) continue;  // palette wider than the group is dead weight
        const double floats = static_cast<double>(r) * static_cast<double>(gpr * k) +
                              static_cast<double>(r) * static_cast<double>(c) * bits / 32.0;
        const double gap = std::abs(static_cast<double>(r) * static_cast<double>(c) / floats -
                                    alpha);
        const std::size_t capacity = gpr * k;
        if (!found || gap < best_gap - 1e-12 ||
            (std::abs(gap - best_gap) <= 1e-12 && capacity > best_capacity)) {
          found = true;
          best_gap = gap;
          best_capacity = capacity;
          choice.bits = bits;
          choice.gpr = static_cast<int>(gpr);
        }
      }
    }
    if (!found)
      throw error("compare_sweep: no sketch configuration fits " + std::to_string(c) +
                  " columns");
    const double floats =
        static_cast<double>(r) * static_cast<double>(choice.gpr) * (1u << choice.bits) +
        static_cast<double>(r) * static_cast<double>(c) * choice.bits / 32.0;
    choice.sketch_ratio = static_cast<double>(r) * static_cast<double>(c) / floats;

    SketchConfig cfg;
    cfg.bits = choice.bits;
    cfg.gpr = choice.gpr;
    cfg.seed = seed;
    const SketchedMatrix sm = sketch_matrix(w, hf, cfg, threads);
    const double sk_err = sketch_delta_error(delta, sm);

    rep.compression_ratios.push_back(alpha);
    rep.lowrank_err.push_back(lr_err);
    rep.sketch_err.push_back(sk_err);
    rep.choices.push_back(choice);
  }
  return rep;
}

}  // namespace sketchkit
