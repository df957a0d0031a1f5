#pragma once

#include <stdexcept>
#include <string>

namespace ltlab {

// Invalid inputs, malformed files, schema violations. CLI exit code 3.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Work refused because it exceeds a declared budget (vertex counts, dense
// linear-algebra sizes, jump limits). CLI exit code 4.
class ResourceLimitError : public std::runtime_error {
 public:
  explicit ResourceLimitError(const std::string& what)
      : std::runtime_error(what) {}
};

// Exact integer arithmetic would overflow; raised instead of wrapping.
class OverflowError : public std::runtime_error {
 public:
  explicit OverflowError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ltlab
