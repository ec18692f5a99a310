#include "trajpred/eval/metrics.hpp"

#include <cmath>
#include <limits>

#include "trajpred/core/error.hpp"

namespace trajpred::eval {

namespace {

double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

MetricReport compute_metrics(const std::vector<MetricInput>& inputs, const MetricOptions& opts) {
  if (inputs.empty()) throw InvalidInput("no instances to evaluate");
  double ade = 0.0, fde = 0.0, apde = 0.0;
  std::size_t misses = 0, crashes = 0;
  for (const auto& in : inputs) {
    const std::size_t n = in.prediction.size();
    if (n == 0 || n != in.truth.size()) throw InvalidInput("prediction and ground truth lengths differ");
    double step_sum = 0.0, path_sum = 0.0;
    bool crashed = false;
    for (std::size_t t = 0; t < n; ++t) {
      step_sum += dist(in.prediction[t], in.truth[t]);
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& g : in.truth) nearest = std::min(nearest, dist(in.prediction[t], g));
      path_sum += nearest;
      for (const auto& nb : in.neighbors) {
        if (nb.size() != n) throw InvalidInput("neighbor future length differs from prediction");
        if (nb[t] && dist(in.prediction[t], *nb[t]) <= opts.crash_distance) crashed = true;
      }
    }
    const double final_err = dist(in.prediction.back(), in.truth.back());
    ade += step_sum / static_cast<double>(n);
    apde += path_sum / static_cast<double>(n);
    fde += final_err;
    if (final_err > opts.miss_threshold) ++misses;
    if (crashed) ++crashes;
  }
  const double count = static_cast<double>(inputs.size());
  MetricReport r;
  r.ade = ade / count;
  r.fde = fde / count;
  r.apde = apde / count;
  r.mr = static_cast<double>(misses) / count;
  r.cr = static_cast<double>(crashes) / count;
  r.n_instances = inputs.size();
  return r;
}

std::vector<MetricInput> metric_inputs(const std::vector<PredictionInstance>& instances,
                                       const std::vector<std::vector<Vec2>>& local_predictions) {
  if (instances.size() != local_predictions.size()) throw InvalidInput("one prediction per instance expected");
  std::vector<MetricInput> out(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    const Vec2 shift = inst.local_frame ? Vec2{0.0, 0.0} : inst.origin;
    auto& m = out[i];
    for (const auto& p : local_predictions[i]) m.prediction.push_back({p.x + shift.x, p.y + shift.y});
    for (const auto& s : inst.target_future.states) m.truth.push_back({s.x, s.y});
    for (const auto& nb : inst.neighbor_futures) {
      std::vector<std::optional<Vec2>> track(nb.mask.size());
      for (std::size_t t = 0; t < nb.mask.size(); ++t) {
        if (nb.mask[t]) track[t] = Vec2{nb.traj.states[t].x, nb.traj.states[t].y};
      }
      out[i].neighbors.push_back(std::move(track));
    }
  }
  return out;
}

}  // namespace trajpred::eval
