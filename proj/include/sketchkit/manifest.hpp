#pragma once
// Reproducibility stamps for generated artifacts.  Every CSV the tool writes
// carries a comment header recording the tool version, the subcommand, the
// fully resolved flag set, and a digest of each input file; binary outputs get
// the same text as a sidecar file next to them.  A run can be reproduced from
// the stamp alone.

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "sketchkit/error.hpp"
#include "sketchkit/mat_io.hpp"
#include "sketchkit/version.hpp"

namespace sketchkit {

inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64_file(const std::string& path) {
  const std::vector<unsigned char> bytes = detail::read_file_bytes(path);
  return fnv1a64(bytes.data(), bytes.size());
}

inline std::string hex_u64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

struct RunManifest {
  std::string subcommand;
  // Fully resolved flags (defaults filled in), in stable print order.
  std::vector<std::pair<std::string, std::string>> flags;
  // Input files consumed by the run, with 64-bit FNV-1a digests of their bytes.
  std::vector<std::pair<std::string, std::uint64_t>> inputs;
  std::string version = SKETCHKIT_VERSION;

  void add_flag(const std::string& name, const std::string& value) {
    flags.emplace_back(name, value);
  }
  void add_input(const std::string& path) { inputs.emplace_back(path, fnv1a64_file(path)); }

  // The stamp text; every line starts with "# " so it doubles as a CSV header.
  std::string header_text() const {
    std::string out;
    out += "# sketchkit " + version + "\n";
    out += "# subcommand: " + subcommand + "\n";
    for (const auto& [name, value] : flags) out += "# flag " + name + " = " + value + "\n";
    for (const auto& [path, digest] : inputs)
      out += "# input " + path + " fnv1a64=" + hex_u64(digest) + "\n";
    return out;
  }

  // Writes the stamp as `<artifact>.manifest.txt` next to a binary output.
  void write_sidecar(const std::string& artifact_path) const {
    const std::string path = artifact_path + ".manifest.txt";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write " + path);
    out << header_text();
    if (!out) throw error("failed while writing " + path);
  }
};

}  // namespace sketchkit
