#pragma once

#include <stdexcept>
#include <string>

namespace cqq {

// Invalid inputs (bad states, mismatched dimensions, malformed configs).
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// An operation would exceed a configured state-space or dimension cap.
struct ResourceError : std::runtime_error {
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cqq
