#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "sketchkit/calibration.hpp"
#include "sketchkit/matrix.hpp"
#include "sketchkit/parallel.hpp"
#include "sketchkit/rng.hpp"
#include "sketchkit/sketch_config.hpp"
#include "sketchkit/sketched_matrix.hpp"

namespace sketchkit {

// Result of clustering one group of values: per-value cluster labels, the k
// cluster centers sorted ascending (labels remapped to match), and the
// weighted objective recomputed from exactly these fields.
struct Assignment {
  std::vector<int> labels;
  std::vector<double> centers;
  double objective = 0.0;
};

namespace detail {

inline void kmeans_assign(const std::vector<double>& values, const std::vector<double>& centers,
                          std::vector<int>& labels) {
  const std::size_t n = values.size(), k = centers.size();
  for (std::size_t i = 0; i < n; ++i) {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      const double d = (values[i] - centers[j]) * (values[i] - centers[j]);
      if (d < bd) {  // strict: ties keep the lower center index
        bd = d;
        best = static_cast<int>(j);
      }
    }
    labels[i] = best;
  }
}

inline double kmeans_objective(const std::vector<double>& values,
                               const std::vector<double>& weights,
                               const std::vector<int>& labels,
                               const std::vector<double>& centers) {
  double obj = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - centers[static_cast<std::size_t>(labels[i])];
    obj += weights[i] * d * d;
  }
  return obj;
}

// Weighted centroid update.  Clusters that lost all members are re-seeded at
// the point of maximum weighted residual (each empty cluster takes a distinct
// point, scanned in ascending cluster index, ties at the lowest point index).
inline void kmeans_update_centers(const std::vector<double>& values,
                                  const std::vector<double>& weights,
                                  const std::vector<int>& labels,
                                  std::vector<double>& centers) {
  const std::size_t n = values.size(), k = centers.size();
  std::vector<double> num(k, 0.0), den(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto l = static_cast<std::size_t>(labels[i]);
    num[l] += weights[i] * values[i];
    den[l] += weights[i];
  }
  std::vector<std::size_t> empty;
  for (std::size_t j = 0; j < k; ++j) {
    if (den[j] > 0.0)
      centers[j] = num[j] / den[j];
    else
      empty.push_back(j);
  }
  if (empty.empty()) return;
  std::vector<double> resid(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto l = static_cast<std::size_t>(labels[i]);
    const double d = den[l] > 0.0 ? values[i] - centers[l] : 0.0;
    resid[i] = weights[i] * d * d;
  }
  for (std::size_t j : empty) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (resid[i] > resid[arg]) arg = i;
    centers[j] = values[arg];
    resid[arg] = 0.0;  // the next empty cluster takes a different point
  }
}

// Initialization from weighted quantiles: centers at the (j + 1/2)/k points
// of the weighted empirical distribution, linearly interpolated between the
// cumulative-weight midpoints of the sorted values.  Consumes no rng draws.
inline std::vector<double> kmeans_init_quantile(const std::vector<double>& values,
                                                const std::vector<double>& weights, int k) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> mid(n), sv(n);
  double cum = 0.0, total = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double w = weights[order[t]];
    mid[t] = cum + 0.5 * w;
    cum += w;
    sv[t] = values[order[t]];
  }
  total = cum;
  std::vector<double> centers(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    const double target = (static_cast<double>(j) + 0.5) / static_cast<double>(k) * total;
    if (target <= mid[0]) {
      centers[static_cast<std::size_t>(j)] = sv[0];
    } else if (target >= mid[n - 1]) {
      centers[static_cast<std::size_t>(j)] = sv[n - 1];
    } else {
      std::size_t hi = 1;
      while (mid[hi] < target) ++hi;
      const double f = (target - mid[hi - 1]) / (mid[hi] - mid[hi - 1]);
      centers[static_cast<std::size_t>(j)] = sv[hi - 1] + f * (sv[hi] - sv[hi - 1]);
    }
  }
  return centers;
}

// Weighted kmeans++ seeding.  Consumes exactly k uniform draws regardless of
// the data, so downstream draw positions never depend on this data.
inline std::vector<double> kmeans_init_pp(const std::vector<double>& values,
                                          const std::vector<double>& weights, int k, Rng& rng) {
  const std::size_t n = values.size();
  std::vector<double> centers;
  centers.reserve(static_cast<std::size_t>(k));
  std::vector<double> d2(n, 0.0);
  for (int j = 0; j < k; ++j) {
    const double u = rng.next_double();
    std::size_t pick = 0;
    if (j == 0) {
      double total = 0.0;
      for (double w : weights) total += w;
      double target = u * total, cum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cum += weights[i];
        if (cum >= target) { pick = i; break; }
        pick = i;
      }
    } else {
      double mass = 0.0;
      for (std::size_t i = 0; i < n; ++i) mass += weights[i] * d2[i];
      if (mass > 0.0) {
        double target = u * mass, cum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          cum += weights[i] * d2[i];
          if (cum >= target && weights[i] * d2[i] > 0.0) { pick = i; break; }
          pick = i;
        }
      } else {
        pick = static_cast<std::size_t>(u * static_cast<double>(n));
        if (pick >= n) pick = n - 1;
      }
    }
    const double c = values[pick];
    centers.push_back(c);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (values[i] - c) * (values[i] - c);
      if (j == 0 || d < d2[i]) d2[i] = d;
    }
  }
  return centers;
}

// Inputs this small admit an exact solve: optimal 1-d clusters are
// contiguous in sorted order, so a tiny dynamic program over split points
// finds the global optimum outright.
constexpr std::size_t kKmeansExactLimit = 8;

// Exact centers for a tiny input (n <= kKmeansExactLimit, k <= n): the
// weighted means of the optimal contiguous partition of the sorted values
// into exactly k non-empty runs.
inline std::vector<double> kmeans_init_contiguous_optimal(const std::vector<double>& values,
                                                          const std::vector<double>& weights,
                                                          int k) {
  const std::size_t n = values.size();
  const std::size_t ks = static_cast<std::size_t>(k);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> sv(n), sw(n);
  for (std::size_t i = 0; i < n; ++i) {
    sv[i] = values[order[i]];
    sw[i] = weights[order[i]];
  }
  auto seg_mean = [&](std::size_t a, std::size_t b) {
    double wsum = 0.0, m = 0.0;
    for (std::size_t i = a; i < b; ++i) {
      wsum += sw[i];
      m += sw[i] * sv[i];
    }
    return m / wsum;
  };
  auto seg_cost = [&](std::size_t a, std::size_t b) {
    const double m = seg_mean(a, b);
    double cost = 0.0;
    for (std::size_t i = a; i < b; ++i) cost += sw[i] * (sv[i] - m) * (sv[i] - m);
    return cost;
  };

  const double inf = std::numeric_limits<double>::infinity();
  // dp[p][i]: best cost of the first i sorted points in exactly p runs.
  std::vector<std::vector<double>> dp(ks + 1, std::vector<double>(n + 1, inf));
  std::vector<std::vector<std::size_t>> cut(ks + 1, std::vector<std::size_t>(n + 1, 0));
  dp[0][0] = 0.0;
  for (std::size_t p = 1; p <= ks; ++p) {
    for (std::size_t i = p; i + (ks - p) <= n; ++i) {
      for (std::size_t j = p - 1; j < i; ++j) {
        const double c = dp[p - 1][j] + seg_cost(j, i);
        if (c < dp[p][i]) {
          dp[p][i] = c;
          cut[p][i] = j;
        }
      }
    }
  }
  std::vector<double> centers(ks);
  std::size_t hi = n;
  for (std::size_t p = ks; p >= 1; --p) {
    const std::size_t lo = cut[p][hi];
    centers[p - 1] = seg_mean(lo, hi);
    hi = lo;
  }
  return centers;
}

struct LloydResult {
  std::vector<int> labels;
  std::vector<double> centers;
  double objective;
};

inline LloydResult kmeans_lloyd(const std::vector<double>& values,
                                const std::vector<double>& weights,
                                std::vector<double> centers, int iters, double tol) {
  const std::size_t n = values.size();
  std::vector<int> labels(n), next(n);
  kmeans_assign(values, centers, labels);
  double prev = kmeans_objective(values, weights, labels, centers);
  for (int it = 0; it < iters; ++it) {
    kmeans_update_centers(values, weights, labels, centers);
    kmeans_assign(values, centers, next);
    const double obj = kmeans_objective(values, weights, next, centers);
    const bool same = std::equal(labels.begin(), labels.end(), next.begin());
    labels = next;
    const bool small_step = prev - obj <= tol * std::max(1.0, std::fabs(prev));
    prev = obj;
    if (same || small_step) break;
  }
  // Final centroid update so centers are exactly the weighted centroids of
  // the returned labels.
  kmeans_update_centers(values, weights, labels, centers);
  const double obj = kmeans_objective(values, weights, labels, centers);
  return LloydResult{std::move(labels), std::move(centers), obj};
}

}  // namespace detail

// Weighted 1-d kmeans.  Restart 0 seeds from weighted quantiles; the
// remaining restarts use weighted kmeans++ draws from `rng` (a fixed number
// of draws per restart, so the stream position after the call depends only
// on k).  The best restart by objective wins; ties keep the earliest.
inline Assignment weighted_kmeans(const std::vector<double>& values,
                                  const std::vector<double>& weights, int k, Rng& rng,
                                  int iters = 100, double tol = 1e-8) {
  if (values.empty() || values.size() != weights.size())
    throw error("weighted_kmeans: need matching non-empty values and weights");
  if (k < 1) throw error("weighted_kmeans: k must be >= 1");
  for (double v : values)
    if (!std::isfinite(v)) throw error("weighted_kmeans: non-finite value");
  for (double w : weights) {
    if (!std::isfinite(w)) throw error("weighted_kmeans: non-finite weight");
    if (!(w > 0.0)) throw error("weighted_kmeans: weights must be positive");
  }

  constexpr int kRestarts = 12;
  detail::LloydResult best;
  best.objective = std::numeric_limits<double>::infinity();
  for (int r = 0; r < kRestarts; ++r) {
    std::vector<double> init = r == 0 ? detail::kmeans_init_quantile(values, weights, k)
                                      : detail::kmeans_init_pp(values, weights, k, rng);
    detail::LloydResult res = detail::kmeans_lloyd(values, weights, std::move(init), iters, tol);
    if (res.objective < best.objective) best = std::move(res);
  }

  // Tiny inputs get one extra deterministic candidate seeded at the exact
  // optimum (restarts alone can miss it); consumes no rng draws, so the
  // stream position still depends only on k.
  if (values.size() <= detail::kKmeansExactLimit &&
      values.size() >= static_cast<std::size_t>(k)) {
    detail::LloydResult res = detail::kmeans_lloyd(
        values, weights, detail::kmeans_init_contiguous_optimal(values, weights, k), iters, tol);
    if (res.objective < best.objective) best = std::move(res);
  }

  // Sort centers ascending and remap labels; equal centers keep their order.
  const std::size_t ks = static_cast<std::size_t>(k);
  std::vector<std::size_t> perm(ks);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::stable_sort(perm.begin(), perm.end(),
                   [&](std::size_t a, std::size_t b) { return best.centers[a] < best.centers[b]; });
  Assignment out;
  out.centers.resize(ks);
  std::vector<int> remap(ks);
  for (std::size_t t = 0; t < ks; ++t) {
    out.centers[t] = best.centers[perm[t]];
    remap[perm[t]] = static_cast<int>(t);
  }
  out.labels.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    out.labels[i] = remap[static_cast<std::size_t>(best.labels[i])];
  out.objective = detail::kmeans_objective(values, weights, out.labels, out.centers);
  return out;
}

// One-hot-per-row mapping matrix with normalized weights: row i has
// S(i, label_i) = w_i / (total weight of label_i's cluster), so values * S
// reproduces the weighted cluster centroids.  Columns of empty clusters are
// all zero.
inline Matrix build_sketching_matrix(const Assignment& assign,
                                     const std::vector<double>& weights) {
  const std::size_t n = assign.labels.size();
  const std::size_t k = assign.centers.size();
  if (weights.size() != n) throw error("build_sketching_matrix: weight count mismatch");
  std::vector<double> clusterw(k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    clusterw[static_cast<std::size_t>(assign.labels[i])] += weights[i];
  Matrix s(n, k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto l = static_cast<std::size_t>(assign.labels[i]);
    s(i, l) = weights[i] / clusterw[l];
  }
  return s;
}

struct Nearest {
  int index;
  double center;
};

// Nearest entry of an ascending-sorted center list; exact midpoints resolve
// to the lower index.
inline Nearest rtn(double value, const std::vector<double>& centers) {
  if (centers.empty()) throw error("rtn: empty center list");
  const auto it = std::lower_bound(centers.begin(), centers.end(), value);
  if (it == centers.begin()) return {0, centers.front()};
  if (it == centers.end())
    return {static_cast<int>(centers.size()) - 1, centers.back()};
  const std::size_t hi = static_cast<std::size_t>(it - centers.begin());
  const double dl = value - centers[hi - 1];
  const double dh = centers[hi] - value;
  if (dl <= dh) return {static_cast<int>(hi - 1), centers[hi - 1]};
  return {static_cast<int>(hi), centers[hi]};
}

struct RowSketch {
  std::vector<double> sketched;       // gpr * k palette values
  std::vector<std::uint8_t> indices;  // one palette index per column
};

namespace detail {

// Sketch one row: per group, cluster the running (compensated) values with
// curvature-derived weights, set the palette from the normalized mapping,
// then walk the columns in blocks mapping each to its nearest palette entry
// while pushing the scaled residual into the not-yet-processed columns
// (within the block first, then past the block to the end of the row).
inline RowSketch learn_row(const double* w, std::size_t c, const HessianFactor& hf,
                           const SketchConfig& cfg, Rng& rng) {
  const std::size_t gpr = static_cast<std::size_t>(cfg.gpr);
  const std::size_t glen = c / gpr;
  const std::size_t k = static_cast<std::size_t>(cfg.k());
  const Matrix& d = hf.chol_upper;
  const std::size_t block = static_cast<std::size_t>(cfg.block);

  RowSketch out;
  out.sketched.resize(gpr * k);
  out.indices.resize(c);
  std::vector<double> wc(w, w + c);
  std::vector<double> weights(glen), values(glen), params(k), e(block);
  std::vector<bool> nonempty(k);

  for (std::size_t g = 0; g < gpr; ++g) {
    const std::size_t g0 = g * glen;
    const std::size_t gend = g0 + glen;
    for (std::size_t t = 0; t < glen; ++t) {
      weights[t] = std::pow(1.0 / hf.inv_diag[g0 + t], cfg.exponent);
      values[t] = wc[g0 + t];
    }
    const Assignment assign =
        weighted_kmeans(values, weights, static_cast<int>(k), rng, cfg.kmeans_iters, cfg.kmeans_tol);
    const Matrix s = build_sketching_matrix(assign, weights);

    std::fill(nonempty.begin(), nonempty.end(), false);
    for (int l : assign.labels) nonempty[static_cast<std::size_t>(l)] = true;
    for (std::size_t j = 0; j < k; ++j) {
      if (nonempty[j]) {
        double dot = 0.0;
        for (std::size_t i = 0; i < glen; ++i) dot += values[i] * s(i, j);
        params[j] = dot;
      } else {
        // keep the re-seeded center so the palette stays sorted and every
        // index value remains meaningful
        params[j] = assign.centers[j];
      }
      params[j] = static_cast<double>(static_cast<float>(params[j]));  // storage grid
    }
    std::sort(params.begin(), params.end());
    for (std::size_t j = 0; j < k; ++j) out.sketched[g * k + j] = params[j];

    for (std::size_t i0 = g0; i0 < gend; i0 += block) {
      const std::size_t iend = std::min(i0 + block, gend);
      for (std::size_t j = i0; j < iend; ++j) {
        const Nearest near = rtn(wc[j], params);
        out.indices[j] = static_cast<std::uint8_t>(near.index);
        const double ej = (wc[j] - near.center) / d(j, j);
        e[j - i0] = ej;
        const double* dj = d.row(j);
        for (std::size_t t = j + 1; t < iend; ++t) wc[t] -= ej * dj[t];
      }
      for (std::size_t j = i0; j < iend; ++j) {
        const double ej = e[j - i0];
        const double* dj = d.row(j);
        for (std::size_t t = iend; t < c; ++t) wc[t] -= ej * dj[t];
      }
    }
  }
  return out;
}

}  // namespace detail

// Sketch a single row given as a vector; randomness is seeded from cfg.seed
// exactly like row 0 of a full matrix.
inline RowSketch learn_to_sketch_row(const std::vector<double>& w, const HessianFactor& hf,
                                     const SketchConfig& cfg) {
  cfg.validate(w.size());
  if (hf.inv_diag.size() != w.size())
    throw error("learn_to_sketch_row: hessian is for " + std::to_string(hf.inv_diag.size()) +
                " columns, row has " + std::to_string(w.size()));
  for (double v : w)
    if (!std::isfinite(v)) throw error("learn_to_sketch_row: non-finite weight");
  Rng rng(cfg.seed);
  return detail::learn_row(w.data(), w.size(), hf, cfg, rng);
}

// Sketch a full matrix.  Rows are independent — row i draws from a stream
// seeded with cfg.seed ^ i — so any thread count produces identical bits.
inline SketchedMatrix sketch_matrix(const Matrix& w, const HessianFactor& hf,
                                    const SketchConfig& cfg, int threads = 1) {
  cfg.validate(w.cols());
  if (w.rows() < 1) throw error("sketch_matrix: matrix has no rows");
  if (hf.inv_diag.size() != w.cols())
    throw error("sketch_matrix: hessian is for " + std::to_string(hf.inv_diag.size()) +
                " columns, matrix has " + std::to_string(w.cols()));
  require_finite(w, "sketch_matrix");

  SketchedMatrix sm;
  sm.rows = w.rows();
  sm.cols = w.cols();
  sm.cfg = cfg;
  sm.sketched.resize(sm.rows * sm.palette_size());
  sm.indices.resize(sm.rows * sm.cols);
  const std::size_t pal = sm.palette_size();
  parallel_for(sm.rows, threads, [&](std::size_t i) {
    Rng rng(cfg.seed ^ static_cast<std::uint64_t>(i));
    RowSketch rs = detail::learn_row(w.row(i), w.cols(), hf, cfg, rng);
    std::copy(rs.sketched.begin(), rs.sketched.end(), sm.sketched.begin() + i * pal);
    std::copy(rs.indices.begin(), rs.indices.end(), sm.indices.begin() + i * sm.cols);
  });
  return sm;
}

// Number of trainable parameters for a list of (rows, cols) layer shapes
// sketched with the given config: every row contributes gpr palettes of
// 2^bits values.
inline std::uint64_t count_trainable_params(
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>& shapes, const SketchConfig& cfg) {
  std::uint64_t total = 0;
  for (const auto& [rows, cols] : shapes) {
    cfg.validate(cols);
    total += rows * static_cast<std::uint64_t>(cfg.gpr) * static_cast<std::uint64_t>(cfg.k());
  }
  return total;
}

}  // namespace sketchkit
