#pragma once

// Binary parameter container:
//   8 bytes   magic "TRJPCKPT"
//   u32       format version
//   u64       header length in bytes
//   header    UTF-8 JSON; "params" lists {name, rows, cols} in payload order
//   payload   column-major little-endian doubles for every listed parameter

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"
#include "trajpred/nn/layers.hpp"

namespace trajpred::train {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct ParamFile {
  nlohmann::json header;
  std::map<std::string, nn::Matrix> params;
};

/// `header` must be an object; its "params" entry is filled in here.
void save_param_file(const std::filesystem::path& path, nlohmann::json header, const nn::ConstParamRefs& params);
ParamFile load_param_file(const std::filesystem::path& path);

/// Copies stored values into `params` by name; every name must be present
/// with the same shape (CheckpointError otherwise).
void assign_params(const ParamFile& file, const nn::ParamRefs& params);

}  // namespace trajpred::train
