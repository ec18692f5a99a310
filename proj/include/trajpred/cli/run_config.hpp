#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "trajpred/data/dataset.hpp"
#include "trajpred/data/split.hpp"
#include "trajpred/eval/metrics.hpp"
#include "trajpred/policy/td3.hpp"
#include "trajpred/train/trainer.hpp"

namespace trajpred::cli {

/// Every knob of an experiment. The single top-level seed drives the split,
/// model initialisation, batching and the policy.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "runs";
  std::vector<data::DataSource> sources;      // in-domain recordings
  std::vector<data::DataSource> ood_sources;  // held-out scenario recordings
  data::WindowOptions window;
  data::SplitSpec split;
  train::TrainConfig train;
  policy::Td3Config policy;
  eval::MetricOptions metrics;
  double csa_alpha = 1.0;
  double csa_beta = 1.0;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Missing keys keep their defaults; unknown keys and bad values raise InvalidInput.
RunConfig run_config_from_json(const nlohmann::json& j);

/// Applies "a.b.c=value" to a JSON tree, creating objects along the path.
/// The value is parsed as JSON when possible and kept as a string otherwise.
void apply_override(nlohmann::json& tree, std::string_view assignment);

/// Reads a config file (or starts from {} when `path` is empty), applies the
/// overrides in order and parses the result.
RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);

}  // namespace trajpred::cli
