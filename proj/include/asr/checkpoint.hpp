#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "asr/model.hpp"

namespace asr {

struct CheckpointMeta {
    std::int64_t epoch = 0;
    std::uint64_t seed = 0;
    std::uint32_t loss_digest = 0;  // CRC32 of the f64 per-epoch loss history
};

struct Checkpoint {
    ModelConfig config;
    CheckpointMeta meta;
    std::map<std::string, TensorPtr> tensors;  // f32-quantized values as read
};

/// Binary container (little-endian): magic "ATAD", u32 version=1,
/// u32 blob length + JSON blob (config + meta), u32 tensor count, per tensor
/// u16 name length, name, u8 ndim, u32 dims[ndim], f32 row-major payload,
/// trailing u32 CRC32 of everything before it.
void save_checkpoint(const std::string& path, const ModelConfig& config, const ModelParams& params,
                     const CheckpointMeta& meta);

/// Validates magic, version, structure and CRC; throws CheckpointError.
Checkpoint load_checkpoint(const std::string& path);

/// Feature-file convenience: same container with one tensor named "data".
void save_tensor_file(const std::string& path, const Tensor& t);
TensorPtr load_tensor_file(const std::string& path);

/// Model params backed by the checkpoint's tensors (promoted to trainable).
ModelParams params_from_checkpoint(const Checkpoint& ckpt);

std::uint32_t crc32(std::span<const unsigned char> bytes);

std::string config_to_json_string(const ModelConfig& config, const CheckpointMeta& meta);

}  // namespace asr
