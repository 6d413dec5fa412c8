#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "holab/nn/tensor.hpp"

namespace holab::nn {

struct NamedTensor {
  std::string name;
  Matrix value;
};

/// On disk: magic "HOLAB", u32 version, architecture descriptor, tensor
/// count, then per tensor its name and shape; the parameter arrays follow as
/// little-endian f64 in declaration order, each row-major.
struct Checkpoint {
  std::string architecture;
  std::vector<NamedTensor> tensors;

  const Matrix& get(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace holab::nn
