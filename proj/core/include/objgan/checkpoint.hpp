#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <torch/torch.h>

namespace objgan {

/// Binary checkpoint layout (little-endian):
///   "OBJGANCK" | u32 version | u32 digest_len | digest bytes | u32 tensor_count
///   then per tensor: u32 name_len | name | u8 dtype (0 = f32, 1 = f64) | u32 ndim | i64 dims[ndim] | raw data
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const torch::nn::Module& module,
                     const std::string& config_digest);

/// Loads parameters and buffers by name. Throws if the digest differs from
/// `expected_digest` (unless it is empty) or any shape disagrees.
std::string load_checkpoint(const std::filesystem::path& path, torch::nn::Module& module,
                            const std::string& expected_digest = {});

}  // namespace objgan
