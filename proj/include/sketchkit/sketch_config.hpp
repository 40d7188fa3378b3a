#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "sketchkit/error.hpp"

namespace sketchkit {

// Shared knobs for learning a sketch.  k (the number of shared values per
// group) is always 2^bits so every packed index value is meaningful.
struct SketchConfig {
  int bits = 4;             // index width in bits, one of {2, 3, 4}
  int gpr = 1;              // groups per row; must divide the column count
  int block = 128;          // column block width for error compensation
  double exponent = 3.0;    // power applied to the clustering weights
  double damp = 0.01;       // hessian dampening used when building factors
  int kmeans_iters = 100;   // iteration cap per clustering restart
  double kmeans_tol = 1e-8; // relative objective tolerance for termination
  std::uint64_t seed = 0;   // base seed; row i uses seed ^ i

  int k() const { return 1 << bits; }

  void validate(std::size_t cols) const {
    if (bits < 2 || bits > 4)
      throw error("config: bits must be 2, 3 or 4, got " + std::to_string(bits));
    if (gpr < 1) throw error("config: gpr must be >= 1, got " + std::to_string(gpr));
    if (cols == 0 || cols % static_cast<std::size_t>(gpr) != 0)
      throw error("config: gpr " + std::to_string(gpr) + " does not divide " +
                  std::to_string(cols) + " columns");
    if (block < 1) throw error("config: block must be >= 1, got " + std::to_string(block));
    if (!(std::isfinite(exponent)) || exponent < 0.0)
      throw error("config: weight exponent must be finite and >= 0");
    if (!(std::isfinite(damp)) || damp < 0.0)
      throw error("config: dampening must be finite and >= 0");
    if (kmeans_iters < 1) throw error("config: kmeans_iters must be >= 1");
    if (!(kmeans_tol >= 0.0)) throw error("config: kmeans_tol must be >= 0");
  }
};

}  // namespace sketchkit
