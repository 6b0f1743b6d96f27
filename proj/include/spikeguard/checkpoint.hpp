#pragma once

#include <cstdint>
#include <string>

#include "spikeguard/network.hpp"

namespace spikeguard {

/// Little-endian binary: "SPKGRD01", u32 version, u32-length model spec JSON,
/// u64 epoch, u64 rng key, u64 rng counter, u32 tensor count, then per tensor
/// a u32-length name, u32 rank, u64 dims and raw float32 values. Tensors are
/// the trainable parameters followed by each tdBN layer's running statistics.
struct Checkpoint {
  Network net;
  std::uint64_t epoch = 0;
  std::uint64_t rng_key = 0;
  std::uint64_t rng_counter = 0;
};

constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const Checkpoint& ck);
Checkpoint parse_checkpoint(const std::string& bytes);
void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace spikeguard
