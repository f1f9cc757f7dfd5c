#pragma once

#include <string>
#include <vector>

#include "rtia/nn/modules.hpp"

namespace rtia::nn {

// Binary parameter container: versioned header followed by named tensors
// (name, shape, raw little-endian f64 values). Writing the same parameters
// twice produces identical bytes.
//
// layout:
//   magic "RTCK" | u32 version | u32 tensor_count
//   per tensor: u32 name_len | name bytes | u32 rank | i64 dims[rank] | f64 data[]

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

void save_checkpoint(const std::string& path, const std::vector<const ParamGroup*>& groups,
                     const std::vector<NamedTensor>& extras = {});

// Loads all tensors from the container. Throws std::runtime_error on a
// malformed file or version mismatch.
std::vector<NamedTensor> load_checkpoint(const std::string& path);

// Copies tensors whose names match group/param names into the given groups.
// Throws if a group's tensor is missing or a shape disagrees.
void restore_groups(const std::vector<NamedTensor>& tensors,
                    const std::vector<ParamGroup*>& groups);

}  // namespace rtia::nn
