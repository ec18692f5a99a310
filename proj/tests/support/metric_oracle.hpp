#pragma once

// Straight loop re-implementation of the trajectory metrics.

#include <cmath>
#include <limits>
#include <random>

#include "trajpred/eval/metrics.hpp"

namespace trajpred::testing {

inline std::vector<eval::MetricInput> random_metric_inputs(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> pos(0.0, 3.0);
  std::uniform_int_distribution<int> len(1, 30), nbs(0, 4);
  std::bernoulli_distribution present(0.8);
  std::vector<eval::MetricInput> out;
  for (int i = 0; i < n; ++i) {
    eval::MetricInput m;
    const int h = len(rng);
    for (int t = 0; t < h; ++t) {
      m.prediction.push_back({pos(rng), pos(rng)});
      m.truth.push_back({pos(rng), pos(rng)});
    }
    const int k = nbs(rng);
    for (int j = 0; j < k; ++j) {
      std::vector<std::optional<Vec2>> nb;
      for (int t = 0; t < h; ++t) nb.push_back(present(rng) ? std::optional<Vec2>(Vec2{pos(rng), pos(rng)}) : std::nullopt);
      m.neighbors.push_back(nb);
    }
    out.push_back(m);
  }
  return out;
}

inline eval::MetricReport brute_force_metrics(const std::vector<eval::MetricInput>& in, const eval::MetricOptions& o) {
  auto dist = [](Vec2 a, Vec2 b) { return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y)); };
  // Per-instance means, then averaged over instances.
  double ade_sum = 0, fde_sum = 0, apde_sum = 0;
  int misses = 0, crashes = 0;
  for (const auto& m : in) {
    double ade = 0, apde = 0;
    for (std::size_t t = 0; t < m.truth.size(); ++t) {
      ade += dist(m.prediction[t], m.truth[t]);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& g : m.truth) best = std::min(best, dist(m.prediction[t], g));
      apde += best;
    }
    ade_sum += ade / static_cast<double>(m.truth.size());
    apde_sum += apde / static_cast<double>(m.truth.size());
    const double f = dist(m.prediction.back(), m.truth.back());
    fde_sum += f;
    if (f > o.miss_threshold) ++misses;
    bool crash = false;
    for (const auto& nb : m.neighbors)
      for (std::size_t t = 0; t < nb.size(); ++t)
        if (nb[t] && dist(m.prediction[t], *nb[t]) <= o.crash_distance) crash = true;
    if (crash) ++crashes;
  }
  eval::MetricReport r;
  r.n_instances = in.size();
  r.ade = ade_sum / static_cast<double>(in.size());
  r.fde = fde_sum / static_cast<double>(in.size());
  r.apde = apde_sum / static_cast<double>(in.size());
  r.mr = static_cast<double>(misses) / static_cast<double>(in.size());
  r.cr = static_cast<double>(crashes) / static_cast<double>(in.size());
  return r;
}

}  // namespace trajpred::testing
