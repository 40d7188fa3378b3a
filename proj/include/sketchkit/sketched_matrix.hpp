#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sketchkit/mat_io.hpp"
#include "sketchkit/matrix.hpp"
#include "sketchkit/parallel.hpp"
#include "sketchkit/sketch_config.hpp"

namespace sketchkit {

// Compressed form of a rows x cols weight matrix: per row, `gpr` groups of
// contiguous columns share a palette of k = 2^bits values ("sketched"
// parameters, the trainable part), and every column stores the index of its
// palette entry.  Palette values live on the float32 grid, since that is
// their serialized precision; indices are frozen after learning.
struct SketchedMatrix {
  std::size_t rows = 0, cols = 0;
  SketchConfig cfg;
  std::vector<double> sketched;       // rows * gpr * k, row-major, group-major
  std::vector<std::uint8_t> indices;  // rows * cols, values in [0, 2^bits)

  std::size_t group_len() const { return cols / static_cast<std::size_t>(cfg.gpr); }
  std::size_t palette_size() const {
    return static_cast<std::size_t>(cfg.gpr) * static_cast<std::size_t>(cfg.k());
  }
  double value_at(std::size_t i, std::size_t j) const {
    const std::size_t g = j / group_len();
    return sketched[(i * static_cast<std::size_t>(cfg.gpr) + g) * static_cast<std::size_t>(cfg.k()) +
                    indices[i * cols + j]];
  }
};

inline void check_shape(const SketchedMatrix& sm) {
  sm.cfg.validate(sm.cols);
  if (sm.rows < 1) throw error("sketched matrix has no rows");
  if (sm.sketched.size() != sm.rows * sm.palette_size())
    throw error("sketched parameter count mismatch: " + std::to_string(sm.sketched.size()) +
                " vs expected " + std::to_string(sm.rows * sm.palette_size()));
  if (sm.indices.size() != sm.rows * sm.cols)
    throw error("index count mismatch: " + std::to_string(sm.indices.size()) +
                " vs expected " + std::to_string(sm.rows * sm.cols));
  const std::uint8_t k = static_cast<std::uint8_t>(sm.cfg.k());
  for (std::uint8_t idx : sm.indices)
    if (idx >= k) throw error("index out of range: " + std::to_string(idx));
}

// Dense matrix the sketch represents.
inline Matrix reconstruct(const SketchedMatrix& sm, int threads = 1) {
  Matrix w(sm.rows, sm.cols);
  const std::size_t glen = sm.group_len();
  const std::size_t k = static_cast<std::size_t>(sm.cfg.k());
  parallel_for(sm.rows, threads, [&](std::size_t i) {
    double* wi = w.row(i);
    const std::uint8_t* idx = sm.indices.data() + i * sm.cols;
    const double* pal = sm.sketched.data() + i * sm.palette_size();
    for (std::size_t j = 0; j < sm.cols; ++j) wi[j] = pal[(j / glen) * k + idx[j]];
  });
  return w;
}

// y = reconstruct(sm) * x, computed without materializing the dense matrix.
// The accumulation order per output row mirrors matmul's (ascending column),
// so the result matches the unfused product exactly.
inline Matrix forward(const SketchedMatrix& sm, const Matrix& x, int threads = 1) {
  if (x.rows() != sm.cols)
    throw error("forward: input has " + std::to_string(x.rows()) + " rows, sketch has " +
                std::to_string(sm.cols) + " columns");
  Matrix y(sm.rows, x.cols(), 0.0);
  const std::size_t glen = sm.group_len();
  const std::size_t k = static_cast<std::size_t>(sm.cfg.k());
  const std::size_t m = x.cols();
  parallel_for(sm.rows, threads, [&](std::size_t i) {
    double* yi = y.row(i);
    const std::uint8_t* idx = sm.indices.data() + i * sm.cols;
    const double* pal = sm.sketched.data() + i * sm.palette_size();
    for (std::size_t j = 0; j < sm.cols; ++j) {
      const double w = pal[(j / glen) * k + idx[j]];
      if (w == 0.0) continue;
      const double* xj = x.row(j);
      for (std::size_t t = 0; t < m; ++t) yi[t] += w * xj[t];
    }
  });
  return y;
}

// Gradient of any scalar loss with respect to the sketched parameters, given
// the upstream gradient with respect to the reconstructed weights.  Each
// palette entry accumulates its columns' contributions in ascending column
// order, so results are independent of the thread count.
inline Matrix grad_sketched(const SketchedMatrix& sm, const Matrix& upstream, int threads = 1) {
  if (upstream.rows() != sm.rows || upstream.cols() != sm.cols)
    throw error("grad_sketched: upstream is " + upstream.shape_str() + ", sketch is " +
                std::to_string(sm.rows) + "x" + std::to_string(sm.cols));
  Matrix g(sm.rows, sm.palette_size(), 0.0);
  const std::size_t glen = sm.group_len();
  const std::size_t k = static_cast<std::size_t>(sm.cfg.k());
  parallel_for(sm.rows, threads, [&](std::size_t i) {
    double* gi = g.row(i);
    const std::uint8_t* idx = sm.indices.data() + i * sm.cols;
    const double* ui = upstream.row(i);
    for (std::size_t j = 0; j < sm.cols; ++j) gi[(j / glen) * k + idx[j]] += ui[j];
  });
  return g;
}

// --- packed index streams ------------------------------------------------
// Indices are packed least-significant-bit first: the first index of a row
// occupies the lowest `bits` bits of the first byte.  Each row is padded to
// a whole byte so rows start byte-aligned.

inline std::size_t packed_row_bytes(std::size_t cols, int bits) {
  return (cols * static_cast<std::size_t>(bits) + 7) / 8;
}

inline std::vector<std::uint8_t> pack_indices(const std::vector<std::uint8_t>& indices,
                                              std::size_t rows, std::size_t cols, int bits) {
  if (indices.size() != rows * cols)
    throw error("pack_indices: got " + std::to_string(indices.size()) + " indices for " +
                std::to_string(rows) + "x" + std::to_string(cols));
  const std::size_t row_bytes = packed_row_bytes(cols, bits);
  std::vector<std::uint8_t> out(rows * row_bytes, 0);
  for (std::size_t i = 0; i < rows; ++i) {
    std::uint8_t* dst = out.data() + i * row_bytes;
    const std::uint8_t* src = indices.data() + i * cols;
    std::uint32_t acc = 0;
    int nbits = 0;
    std::size_t pos = 0;
    for (std::size_t j = 0; j < cols; ++j) {
      acc |= static_cast<std::uint32_t>(src[j]) << nbits;
      nbits += bits;
      while (nbits >= 8) {
        dst[pos++] = static_cast<std::uint8_t>(acc & 0xff);
        acc >>= 8;
        nbits -= 8;
      }
    }
    if (nbits > 0) dst[pos++] = static_cast<std::uint8_t>(acc & 0xff);
  }
  return out;
}

inline std::vector<std::uint8_t> unpack_indices(const std::vector<std::uint8_t>& bytes,
                                                std::size_t rows, std::size_t cols, int bits) {
  const std::size_t row_bytes = packed_row_bytes(cols, bits);
  if (bytes.size() != rows * row_bytes)
    throw error("truncated index stream: expected " + std::to_string(rows * row_bytes) +
                " bytes, got " + std::to_string(bytes.size()));
  std::vector<std::uint8_t> out(rows * cols);
  const std::uint32_t mask = (1u << bits) - 1u;
  for (std::size_t i = 0; i < rows; ++i) {
    const std::uint8_t* src = bytes.data() + i * row_bytes;
    std::uint8_t* dst = out.data() + i * cols;
    std::uint32_t acc = 0;
    int nbits = 0;
    std::size_t pos = 0;
    for (std::size_t j = 0; j < cols; ++j) {
      while (nbits < bits) {
        acc |= static_cast<std::uint32_t>(src[pos++]) << nbits;
        nbits += 8;
      }
      dst[j] = static_cast<std::uint8_t>(acc & mask);
      acc >>= bits;
      nbits -= bits;
    }
  }
  return out;
}

// --- serialized format ----------------------------------------------------
// Layout: "SKT1", u16 version (1), u32 rows, u32 cols, u16 gpr, u8 bits,
// u8 reserved (0); then rows*gpr*k float32 sketched parameters (row-major,
// group-major), then the packed index stream of every row.  18-byte header,
// little-endian throughout, no trailing bytes.

inline std::size_t skt1_file_size(std::size_t rows, std::size_t cols, int gpr, int bits) {
  return 18 + rows * static_cast<std::size_t>(gpr) * (std::size_t{1} << bits) * 4 +
         rows * packed_row_bytes(cols, bits);
}

inline void write_skt1(const std::string& path, const SketchedMatrix& sm) {
  check_shape(sm);
  detail::ByteWriter w;
  w.raw("SKT1", 4);
  w.u16(1);
  w.u32(static_cast<std::uint32_t>(sm.rows));
  w.u32(static_cast<std::uint32_t>(sm.cols));
  w.u16(static_cast<std::uint16_t>(sm.cfg.gpr));
  w.u8(static_cast<std::uint8_t>(sm.cfg.bits));
  w.u8(0);
  for (double v : sm.sketched) w.f32(static_cast<float>(v));
  const auto packed = pack_indices(sm.indices, sm.rows, sm.cols, sm.cfg.bits);
  w.raw(packed.data(), packed.size());
  detail::write_file_bytes(path, w.bytes);
}

inline SketchedMatrix read_skt1(const std::string& path) {
  const auto bytes = detail::read_file_bytes(path);
  detail::check_magic(bytes, "SKT1", path);
  detail::ByteReader r(bytes);
  r.pos = 4;
  const std::uint16_t version = r.u16("version");
  if (version != 1)
    throw error("unsupported version " + std::to_string(version) + " in " + path);
  SketchedMatrix sm;
  sm.rows = r.u32("rows");
  sm.cols = r.u32("cols");
  sm.cfg.gpr = r.u16("gpr");
  sm.cfg.bits = r.u8("bits");
  (void)r.u8("reserved");
  if (sm.rows < 1 || sm.cols < 1)
    throw error("empty sketch in " + path + ": " + std::to_string(sm.rows) + "x" +
                std::to_string(sm.cols));
  try {
    sm.cfg.validate(sm.cols);
  } catch (const error& e) {
    throw error("invalid header in " + path + ": " + e.what());
  }
  const std::size_t expected = skt1_file_size(sm.rows, sm.cols, sm.cfg.gpr, sm.cfg.bits);
  if (bytes.size() != expected)
    throw error("size mismatch in " + path + ": header implies " + std::to_string(expected) +
                " bytes, file has " + std::to_string(bytes.size()));
  const std::size_t np = sm.rows * sm.palette_size();
  sm.sketched.resize(np);
  for (std::size_t i = 0; i < np; ++i) sm.sketched[i] = static_cast<double>(r.f32("sketched"));
  std::vector<std::uint8_t> packed(bytes.begin() + static_cast<std::ptrdiff_t>(r.pos),
                                   bytes.end());
  sm.indices = unpack_indices(packed, sm.rows, sm.cols, sm.cfg.bits);
  for (double v : sm.sketched)
    if (!std::isfinite(v)) throw error("non-finite sketched parameter in " + path);
  return sm;
}

}  // namespace sketchkit
