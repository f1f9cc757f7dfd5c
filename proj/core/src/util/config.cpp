#include "rtia/util/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

extern char** environ;

namespace rtia::util {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": unterminated section header");
      section = lower(trim(t.substr(1, t.size() - 2)));
      if (section.empty())
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty section name");
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = lower(trim(t.substr(0, eq)));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    if (section.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": key outside any [section]");
    cfg.values_[section + "." + key] = value;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_string(ss.str(), path);
}

void Config::apply_env_overrides(const char* prefix) {
  const std::string pre(prefix);
  for (char** e = environ; *e != nullptr; ++e) {
    const std::string entry(*e);
    if (entry.rfind(pre, 0) != 0) continue;
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string name = entry.substr(pre.size(), eq - pre.size());
    const std::string value = entry.substr(eq + 1);
    const std::size_t us = name.find('_');
    if (us == std::string::npos) continue;
    const std::string section = lower(name.substr(0, us));
    const std::string key = lower(name.substr(us + 1));
    if (section.empty() || key.empty()) continue;
    values_[section + "." + key] = value;
  }
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  values_[lower(section) + "." + lower(key)] = value;
}

bool Config::has(const std::string& section, const std::string& key) const {
  return values_.count(lower(section) + "." + lower(key)) > 0;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& def) const {
  auto it = values_.find(lower(section) + "." + lower(key));
  return it == values_.end() ? def : it->second;
}

double Config::get_double(const std::string& section, const std::string& key, double def) const {
  auto it = values_.find(lower(section) + "." + lower(key));
  if (it == values_.end()) return def;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: " + it->first + ": not a number: '" + it->second + "'");
  }
}

int64_t Config::get_int(const std::string& section, const std::string& key, int64_t def) const {
  auto it = values_.find(lower(section) + "." + lower(key));
  if (it == values_.end()) return def;
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: " + it->first + ": not an integer: '" + it->second + "'");
  }
}

bool Config::get_bool(const std::string& section, const std::string& key, bool def) const {
  auto it = values_.find(lower(section) + "." + lower(key));
  if (it == values_.end()) return def;
  const std::string v = lower(it->second);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: " + it->first + ": not a boolean: '" + it->second + "'");
}

std::string Config::snapshot() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace rtia::util
