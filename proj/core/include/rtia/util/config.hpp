#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtia::util {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat "key = value" configuration with [section] headers and '#' comments.
// Environment variables RTIA_<SECTION>_<KEY> (upper-case) override file
// values; programmatic overrides ("section.key=value") take highest
// precedence. Parse errors carry the offending line number.
class Config {
 public:
  Config() = default;

  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  void apply_env_overrides(const char* prefix = "RTIA_");
  void set(const std::string& section, const std::string& key, const std::string& value);

  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& def) const;
  double get_double(const std::string& section, const std::string& key, double def) const;
  int64_t get_int(const std::string& section, const std::string& key, int64_t def) const;
  bool get_bool(const std::string& section, const std::string& key, bool def) const;

  // Full resolved snapshot (sorted), for manifests and reproducibility.
  std::string snapshot() const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  // key: "section.key"
  std::map<std::string, std::string> values_;
};

}  // namespace rtia::util
