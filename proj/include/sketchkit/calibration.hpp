#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "sketchkit/linalg.hpp"
#include "sketchkit/matrix.hpp"
#include "sketchkit/rng.hpp"

namespace sketchkit {

// Calibration inputs: one column per sample, one row per input feature, so a
// weight row w (1 x c) acts on x (c x m) as w * x.
struct CalibrationSet {
  Matrix x;
};

inline CalibrationSet make_calibration(Matrix x) {
  if (x.rows() < 1 || x.cols() < 1)
    throw error("calibration set must be non-empty, got " + x.shape_str());
  require_finite(x, "calibration set");
  return CalibrationSet{std::move(x)};
}

enum class CalibDist { gaussian, heavy_tail };

inline CalibDist parse_calib_dist(const std::string& name) {
  if (name == "gaussian") return CalibDist::gaussian;
  if (name == "heavy_tail") return CalibDist::heavy_tail;
  throw error("unknown calibration distribution \"" + name +
              "\" (expected gaussian or heavy_tail)");
}

// Synthetic calibration data.  Entries are drawn row-major from a single
// stream seeded with `seed`; heavy_tail then scales 5% of the columns
// (at least one, chosen by a partial shuffle from the same stream) by 10x.
inline CalibrationSet synth_calibration(std::size_t c, std::size_t m, std::uint64_t seed,
                                        CalibDist dist = CalibDist::gaussian) {
  if (c < 1 || m < 1) throw error("synth_calibration: empty shape");
  Rng rng(seed);
  Matrix x(c, m);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.next_gaussian();
  if (dist == CalibDist::heavy_tail) {
    const std::size_t ncols = std::max<std::size_t>(1, (m * 5 + 50) / 100);
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t t = 0; t < ncols; ++t) {
      const std::size_t j = t + static_cast<std::size_t>(rng.next_below(m - t));
      std::swap(idx[t], idx[j]);
      for (std::size_t i = 0; i < c; ++i) x(i, idx[t]) *= 10.0;
    }
  }
  return CalibrationSet{std::move(x)};
}

// Curvature of the layer-wise objective ||w x - w_hat x||^2 and the derived
// factors used throughout sketching.
struct HessianFactor {
  Matrix h;                      // dampened 2 x x^T
  Matrix h_inv;                  // inverse of h
  Matrix chol_upper;             // upper Cholesky factor of h_inv
  std::vector<double> inv_diag;  // diag(h_inv), strictly positive
  double damp = 0.0;
};

inline HessianFactor build_hessian(const CalibrationSet& calib, double damp = 0.01,
                                   int threads = 1) {
  if (damp < 0.0 || !std::isfinite(damp)) throw error("build_hessian: invalid dampening");
  const Matrix& x = calib.x;
  const std::size_t c = x.rows();
  Matrix h = matmul_nt(x, x, threads);
  for (double& v : h.data()) v *= 2.0;
  double mean_diag = 0.0;
  for (std::size_t i = 0; i < c; ++i) mean_diag += h(i, i);
  mean_diag /= static_cast<double>(c);
  for (std::size_t i = 0; i < c; ++i) h(i, i) += damp * mean_diag;

  HessianFactor out;
  out.damp = damp;
  try {
    out.h_inv = spd_inverse(h);
    out.chol_upper = cholesky_upper(out.h_inv);
  } catch (const error& e) {
    throw error("singular Hessian, increase dampening (" + std::string(e.what()) + ")");
  }
  out.inv_diag.resize(c);
  for (std::size_t i = 0; i < c; ++i) {
    out.inv_diag[i] = out.h_inv(i, i);
    if (!(out.inv_diag[i] > 0.0))
      throw error("singular Hessian, increase dampening (non-positive inverse diagonal at " +
                  std::to_string(i) + ")");
  }
  out.h = std::move(h);
  return out;
}

}  // namespace sketchkit
