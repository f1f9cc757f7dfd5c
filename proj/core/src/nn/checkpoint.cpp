#include "rtia/nn/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace rtia::nn {

namespace {

constexpr char kMagic[4] = {'R', 'T', 'C', 'K'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void write_i64(std::ostream& os, int64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }

uint32_t read_u32(std::istream& is) {
  uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

int64_t read_i64(std::istream& is) {
  int64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 8);
  return v;
}

void write_tensor(std::ostream& os, const std::string& name, const Tensor& t) {
  write_u32(os, static_cast<uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u32(os, static_cast<uint32_t>(t.shape().size()));
  for (int d : t.shape()) write_i64(os, d);
  os.write(reinterpret_cast<const char*>(t.data()),
           static_cast<std::streamsize>(t.size() * sizeof(double)));
}

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<const ParamGroup*>& groups,
                     const std::vector<NamedTensor>& extras) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot open for write: " + path);
  os.write(kMagic, 4);
  write_u32(os, kVersion);
  uint32_t count = static_cast<uint32_t>(extras.size());
  for (const auto* g : groups) count += static_cast<uint32_t>(g->params().size());
  write_u32(os, count);
  for (const auto* g : groups)
    for (const auto& p : g->params()) write_tensor(os, p.name, p.value);
  for (const auto& e : extras) write_tensor(os, e.name, e.tensor);
  if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

std::vector<NamedTensor> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  const uint32_t version = read_u32(is);
  if (version != kVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  const uint32_t count = read_u32(is);
  std::vector<NamedTensor> out;
  out.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    const uint32_t name_len = read_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const uint32_t rank = read_u32(is);
    std::vector<int> shape(rank);
    for (uint32_t d = 0; d < rank; ++d) shape[d] = static_cast<int>(read_i64(is));
    Tensor t(shape);
    is.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!is) throw std::runtime_error("checkpoint: truncated file " + path);
    out.push_back({std::move(name), std::move(t)});
  }
  return out;
}

void restore_groups(const std::vector<NamedTensor>& tensors,
                    const std::vector<ParamGroup*>& groups) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& nt : tensors) by_name[nt.name] = &nt.tensor;
  for (auto* g : groups) {
    for (auto& p : g->params()) {
      auto it = by_name.find(p.name);
      if (it == by_name.end())
        throw std::runtime_error("checkpoint: missing tensor " + p.name);
      if (it->second->shape() != p.value.shape())
        throw std::runtime_error("checkpoint: shape mismatch for " + p.name + ": file " +
                                 shape_str(it->second->shape()) + " vs " +
                                 shape_str(p.value.shape()));
      p.value = *it->second;
    }
  }
}

}  // namespace rtia::nn
