#include "trajpred/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "trajpred/core/error.hpp"

namespace trajpred::data {

SplitIndices stratified_split_indices(const std::vector<PredictionInstance>& instances, const SplitSpec& spec) {
  const double total = spec.train_fraction + spec.val_fraction + spec.test_fraction;
  if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("split fractions must sum to 1");
  if (spec.train_fraction < 0 || spec.val_fraction < 0 || spec.test_fraction < 0) {
    throw InvalidInput("split fractions must be non-negative");
  }

  std::map<Scenario, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < instances.size(); ++i) strata[instances[i].scenario].push_back(i);

  SplitIndices out;
  for (auto& [tag, members] : strata) {
    std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return instances[a].recording_id < instances[b].recording_id;
    });
    std::mt19937_64 rng(spec.seed ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(tag) + 1)));
    std::shuffle(members.begin(), members.end(), rng);
    const auto n = static_cast<double>(members.size());
    const auto n_train = static_cast<std::size_t>(std::llround(n * spec.train_fraction));
    const auto n_val =
        std::min(members.size() - n_train, static_cast<std::size_t>(std::llround(n * spec.val_fraction)));
    out.train.insert(out.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.val.insert(out.val.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train),
                   members.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    out.test.insert(out.test.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), members.end());
  }
  return out;
}

Split stratified_split(const std::vector<PredictionInstance>& instances, const SplitSpec& spec) {
  const auto idx = stratified_split_indices(instances, spec);
  Split out;
  for (auto i : idx.train) out.train.push_back(instances[i]);
  for (auto i : idx.val) out.val.push_back(instances[i]);
  for (auto i : idx.test) out.test.push_back(instances[i]);
  return out;
}

}  // namespace trajpred::data
