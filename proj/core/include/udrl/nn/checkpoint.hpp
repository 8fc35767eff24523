#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "udrl/nn/tensor.hpp"

namespace udrl::nn {

// Binary parameter checkpoint, all integers little-endian:
//   magic     8 bytes  "UDRLCKPT"
//   version   u32      kCheckpointVersion
//   flags     u32      bit 0 = command-free policy
//   meta_len  u32      followed by meta_len bytes of UTF-8 JSON metadata
//   count     u32      number of tensors
//   per tensor: rank u32, then rank x u32 dimensions
//   data      f64 (IEEE-754, little-endian) for every tensor, in table order
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::uint32_t kFlagCommandFree = 1u;

struct Checkpoint {
  std::uint32_t flags = 0;
  std::string metadata;
  std::vector<Tensor> tensors;

  bool operator==(const Checkpoint&) const = default;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace udrl::nn
