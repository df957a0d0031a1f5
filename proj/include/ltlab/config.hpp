#pragma once

// Flat key = value configuration files.
//
//   # comment
//   experiment = thick-hd
//   walk.dim = 3
//   walk.radius = 32
//
// Keys are dotted lowercase identifiers.  Parsing is strict: unknown keys,
// duplicate keys, and malformed lines are errors, so a typo cannot
// silently fall back to a default.  Values are fetched typed; fetching
// also marks the key as consumed, and `finish()` rejects any key that was
// set but never consumed by the experiment it configured.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ltlab {

class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  // Typed getters; the two-argument forms return the default when the key
  // is absent.  Throws ConfigError on type mismatch.
  std::string get_string(const std::string& key);
  std::string get_string(const std::string& key, const std::string& fallback);
  std::int64_t get_int(const std::string& key);
  std::int64_t get_int(const std::string& key, std::int64_t fallback);
  double get_double(const std::string& key);
  double get_double(const std::string& key, double fallback);
  bool get_bool(const std::string& key);
  bool get_bool(const std::string& key, bool fallback);

  bool has(const std::string& key) const;
  // Throws ConfigError listing any keys never consumed.
  void finish() const;

  // All keys in file order (for echoing a config into a report).
  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

 private:
  std::string take(const std::string& key);
  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> consumed_;
};

}  // namespace ltlab
