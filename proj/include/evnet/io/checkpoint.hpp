#pragma once

// Binary checkpoint:
//   "EVN1" | version u32 | config-JSON length u32 + bytes | tensor count u32
//   | per tensor: name length u16 + name, rank u8, dims u32 each,
//     payload f64 little-endian (row-major).

#include "evnet/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace evnet::io {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

struct Checkpoint {
  ModelConfig config;
  ModelParams params;
  nlohmann::json extra;  // e.g. normalization settings of the run
};

std::string encode_checkpoint(const ModelParams& params, const ModelConfig& cfg, const nlohmann::json& extra = {});
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, const ModelConfig& cfg,
                     const nlohmann::json& extra = {});
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Throws CheckpointError naming the first tensor that is missing, extra,
/// or shaped differently from `expected`.
void require_same_shapes(const ModelParams& loaded, const ModelParams& expected);

/// Loads and checks the tensors against a freshly initialized model of
/// `expected`.
Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected);

}  // namespace evnet::io
