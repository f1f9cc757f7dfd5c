#pragma once

#include <string>
#include <vector>

#include "rtia/util/config.hpp"

namespace rtia::util {

// 64-bit FNV-1a over a file's bytes; the content hash manifests record.
uint64_t file_hash(const std::string& path);
std::string hash_hex(uint64_t h);

// One manifest per artifact-producing run: subcommand, resolved config
// snapshot, seeds, and the content hashes of every artifact consumed or
// produced.
struct RunManifest {
  std::string subcommand;
  std::string config_path;
  std::string config_snapshot;
  std::vector<uint64_t> seeds;
  std::vector<std::pair<std::string, uint64_t>> consumed;  // path, hash
  std::vector<std::pair<std::string, uint64_t>> produced;

  void add_consumed(const std::string& path) { consumed.emplace_back(path, file_hash(path)); }
  void add_produced(const std::string& path) { produced.emplace_back(path, file_hash(path)); }

  void write(const std::string& path) const;
};

}  // namespace rtia::util
