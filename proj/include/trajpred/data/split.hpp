#pragma once

#include <cstdint>
#include <vector>

#include "trajpred/core/domain.hpp"

namespace trajpred::data {

struct SplitSpec {
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

struct Split {
  std::vector<PredictionInstance> train;
  std::vector<PredictionInstance> val;
  std::vector<PredictionInstance> test;
};

/// Stratified by scenario tag. Inside a stratum, members are ordered by
/// (recording_id, input position) and then shuffled with the seed, so the
/// result does not depend on how strata are interleaved in the input.
/// Per stratum: train = round(n * f_train), val = round(n * f_val), test = rest.
SplitIndices stratified_split_indices(const std::vector<PredictionInstance>& instances, const SplitSpec& spec);
Split stratified_split(const std::vector<PredictionInstance>& instances, const SplitSpec& spec);

}  // namespace trajpred::data
