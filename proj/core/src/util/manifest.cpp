#include "rtia/util/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace rtia::util {

uint64_t file_hash(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("file_hash: cannot open " + path);
  uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 14];
  while (is) {
    is.read(buf, sizeof(buf));
    const std::streamsize got = is.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

std::string hash_hex(uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void RunManifest::write(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("manifest: cannot write " + path);
  os << "# run manifest v1\n";
  os << "subcommand = " << subcommand << "\n";
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  os << "timestamp_unix = "
     << std::chrono::duration_cast<std::chrono::seconds>(now).count() << "\n";
  os << "config_path = " << config_path << "\n";
  os << "seeds =";
  for (uint64_t s : seeds) os << ' ' << s;
  os << "\n";
  for (const auto& [p, h] : consumed) os << "consumed " << hash_hex(h) << ' ' << p << "\n";
  for (const auto& [p, h] : produced) os << "produced " << hash_hex(h) << ' ' << p << "\n";
  os << "[config_snapshot]\n" << config_snapshot;
}

}  // namespace rtia::util
