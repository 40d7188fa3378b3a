#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "sketchkit/error.hpp"
#include "sketchkit/matrix.hpp"

namespace sketchkit {

static_assert(std::endian::native == std::endian::little,
              "serialized formats are little-endian; big-endian hosts are unsupported");
static_assert(sizeof(double) == 8 && sizeof(float) == 4, "IEEE-754 storage expected");

namespace detail {

inline std::string printable_bytes(const unsigned char* p, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] >= 0x20 && p[i] < 0x7f) {
      out += static_cast<char>(p[i]);
    } else {
      char buf[8];
      std::snprintf(buf, sizeof(buf), "\\x%02x", p[i]);
      out += buf;
    }
  }
  return out;
}

inline std::vector<unsigned char> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("cannot open file: " + path);
  in.seekg(0, std::ios::end);
  const std::streamoff len = in.tellg();
  in.seekg(0, std::ios::beg);
  if (len < 0 || !in) throw error("cannot determine size of file: " + path);
  std::vector<unsigned char> bytes(static_cast<std::size_t>(len));
  if (len > 0) in.read(reinterpret_cast<char*>(bytes.data()), len);
  if (!in) throw error("cannot read file: " + path);
  return bytes;
}

inline void write_file_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw error("cannot open file for write: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw error("cannot write file: " + path);
}

// The magic check runs before any payload is interpreted; the message shows
// the bytes that were actually present.
inline void check_magic(const std::vector<unsigned char>& bytes, const char magic[4],
                        const std::string& path) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), magic, 4) != 0) {
    const std::size_t got = bytes.size() < 4 ? bytes.size() : 4;
    throw error("bad magic in " + path + ": expected \"" + std::string(magic, 4) +
                "\", found \"" + printable_bytes(bytes.data(), got) + "\"");
  }
}

struct ByteWriter {
  std::vector<unsigned char> bytes;
  void raw(const void* p, std::size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    bytes.insert(bytes.end(), b, b + n);
  }
  void u8(std::uint8_t v) { raw(&v, 1); }
  void u16(std::uint16_t v) { raw(&v, 2); }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void f32(float v) { raw(&v, 4); }
  void f64(double v) { raw(&v, 8); }
};

struct ByteReader {
  const std::vector<unsigned char>& bytes;
  std::size_t pos = 0;
  explicit ByteReader(const std::vector<unsigned char>& b) : bytes(b) {}
  void raw(void* p, std::size_t n, const char* what) {
    if (pos + n > bytes.size())
      throw error(std::string("truncated input while reading ") + what + ": need " +
                  std::to_string(n) + " bytes at offset " + std::to_string(pos) + ", file has " +
                  std::to_string(bytes.size()));
    std::memcpy(p, bytes.data() + pos, n);
    pos += n;
  }
  std::uint8_t u8(const char* what) { std::uint8_t v; raw(&v, 1, what); return v; }
  std::uint16_t u16(const char* what) { std::uint16_t v; raw(&v, 2, what); return v; }
  std::uint32_t u32(const char* what) { std::uint32_t v; raw(&v, 4, what); return v; }
  float f32(const char* what) { float v; raw(&v, 4, what); return v; }
  double f64(const char* what) { double v; raw(&v, 8, what); return v; }
};

}  // namespace detail

enum class MatDtype : std::uint8_t { f64 = 0, f32 = 1 };

// Layout: "MAT1", u8 dtype (0 = float64, 1 = float32), u32 rows, u32 cols,
// then the row-major payload.  13-byte header, everything little-endian.
inline void write_mat1(const std::string& path, const Matrix& m,
                       MatDtype dtype = MatDtype::f64) {
  require_finite(m, "write_mat1");
  detail::ByteWriter w;
  w.raw("MAT1", 4);
  w.u8(static_cast<std::uint8_t>(dtype));
  w.u32(static_cast<std::uint32_t>(m.rows()));
  w.u32(static_cast<std::uint32_t>(m.cols()));
  if (dtype == MatDtype::f64) {
    for (double v : m.data()) w.f64(v);
  } else {
    for (double v : m.data()) w.f32(static_cast<float>(v));
  }
  detail::write_file_bytes(path, w.bytes);
}

inline Matrix read_mat1(const std::string& path) {
  const auto bytes = detail::read_file_bytes(path);
  detail::check_magic(bytes, "MAT1", path);
  detail::ByteReader r(bytes);
  r.pos = 4;
  const std::uint8_t dtype = r.u8("dtype");
  if (dtype > 1)
    throw error("unknown dtype " + std::to_string(dtype) + " in " + path);
  const std::uint32_t rows = r.u32("rows");
  const std::uint32_t cols = r.u32("cols");
  const std::size_t count = static_cast<std::size_t>(rows) * cols;
  const std::size_t esize = dtype == 0 ? 8 : 4;
  const std::size_t expected = 13 + count * esize;
  if (bytes.size() != expected)
    throw error("size mismatch in " + path + ": header implies " + std::to_string(expected) +
                " bytes, file has " + std::to_string(bytes.size()));
  Matrix m(rows, cols);
  if (dtype == 0) {
    for (std::size_t i = 0; i < count; ++i) m.data()[i] = r.f64("payload");
  } else {
    for (std::size_t i = 0; i < count; ++i) m.data()[i] = static_cast<double>(r.f32("payload"));
  }
  if (!all_finite(m)) throw error("non-finite entry in " + path);
  return m;
}

}  // namespace sketchkit
