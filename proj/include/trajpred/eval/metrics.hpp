#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trajpred/core/domain.hpp"

namespace trajpred::eval {

struct MetricOptions {
  double miss_threshold = 2.0;  // metres, final-step error
  double crash_distance = 1.0;  // metres, centre to centre
};

struct MetricReport {
  double ade = 0.0;
  double fde = 0.0;
  double apde = 0.0;
  double mr = 0.0;
  double cr = 0.0;
  std::size_t n_instances = 0;
};

/// Prediction, ground truth and the neighbours' ground-truth positions at the
/// same future steps (absent steps are nullopt). All in one common frame.
struct MetricInput {
  std::vector<Vec2> prediction;
  std::vector<Vec2> truth;
  std::vector<std::vector<std::optional<Vec2>>> neighbors;
};

/// ADE: mean per-step error. FDE: mean final-step error. APDE: mean distance
/// from each predicted point to the nearest ground-truth vertex. MR: share of
/// instances with final error > miss_threshold. CR: share of instances where a
/// predicted point comes within crash_distance of a neighbour at the same step.
/// Throws InvalidInput on length mismatch or an empty set.
MetricReport compute_metrics(const std::vector<MetricInput>& inputs, const MetricOptions& opts = {});

/// Builds metric inputs from instances and predictions given in each
/// instance's local frame.
std::vector<MetricInput> metric_inputs(const std::vector<PredictionInstance>& instances,
                                       const std::vector<std::vector<Vec2>>& local_predictions);

}  // namespace trajpred::eval
