#include "ltlab/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ltlab/errors.hpp"

namespace ltlab {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool valid_key(const std::string& k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  bool prev_dot = false;
  for (char c : k) {
    if (c == '.') {
      if (prev_dot) return false;
      prev_dot = true;
      continue;
    }
    prev_dot = false;
    if (!(std::islower(static_cast<unsigned char>(c)) ||
          std::isdigit(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
      return false;
    }
  }
  return true;
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key)) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": bad key '" + key + "'");
    }
    if (value.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty value for '" + key + "'");
    }
    if (!cfg.values_.emplace(key, value).second) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
    }
    cfg.entries_.emplace_back(key, value);
    cfg.consumed_[key] = false;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::take(const std::string& key) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("config: missing key '" + key + "'");
  consumed_[key] = true;
  return it->second;
}

std::string Config::get_string(const std::string& key) { return take(key); }

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) {
  return has(key) ? take(key) : fallback;
}

std::int64_t Config::get_int(const std::string& key) {
  const std::string v = take(key);
  std::int64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("config: '" + key + "' is not an integer: " + v);
  }
  return out;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) {
  return has(key) ? get_int(key) : fallback;
}

double Config::get_double(const std::string& key) {
  const std::string v = take(key);
  try {
    std::size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' is not a number: " + v);
  }
}

double Config::get_double(const std::string& key, double fallback) {
  return has(key) ? get_double(key) : fallback;
}

bool Config::get_bool(const std::string& key) {
  const std::string v = take(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: '" + key + "' is not a boolean: " + v);
}

bool Config::get_bool(const std::string& key, bool fallback) {
  return has(key) ? get_bool(key) : fallback;
}

void Config::finish() const {
  std::string unused;
  for (const auto& [key, used] : consumed_) {
    if (!used) unused += (unused.empty() ? "" : ", ") + key;
  }
  if (!unused.empty()) {
    throw ConfigError("config: unknown or unused keys: " + unused);
  }
}

}  // namespace ltlab
