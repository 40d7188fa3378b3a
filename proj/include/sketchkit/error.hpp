#pragma once

#include <stdexcept>
#include <string>

namespace sketchkit {

// All failures from public operations are reported through this type.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sketchkit
