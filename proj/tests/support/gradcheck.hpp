#pragma once

// Central finite-difference check of tape gradients.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "trajpred/nn/layers.hpp"

namespace trajpred::testing {

struct GradCheckResult {
  double max_rel_error = 0.0;  // worst per-tensor ||analytic - numeric|| / max(||analytic|| + ||numeric||, floor)
  std::string worst;
  int checked_entries = 0;
};

/// `loss` must rebuild the scalar loss on the given tape from the current
/// parameter values. Up to `per_param` entries of every tensor are perturbed
/// by +-h. The denominator floor keeps tensors whose true gradient is zero
/// (e.g. a shift that cancels in the loss) from comparing round-off to round-off.
inline GradCheckResult gradcheck(const nn::ParamRefs& params, const std::function<nn::Var(nn::Tape&)>& loss,
                                 double h = 1e-3, int per_param = 6, std::uint64_t seed = 0, double floor = 1e-6) {
  nn::Tape tape;
  nn::Var l = loss(tape);
  tape.backward(l);
  std::mt19937_64 rng(seed);
  GradCheckResult out;
  for (auto* p : params) {
    const nn::Matrix g = tape.grad(*p);
    const Eigen::Index n = p->value.size();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) idx[static_cast<std::size_t>(k)] = k;
    if (n > per_param) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(static_cast<std::size_t>(per_param));
    }
    double diff = 0.0, na = 0.0, nn_ = 0.0;
    for (auto k : idx) {
      double& v = p->value.data()[k];
      const double orig = v;
      v = orig + h;
      nn::Tape tp;
      const double fp = loss(tp).scalar();
      v = orig - h;
      nn::Tape tm;
      const double fm = loss(tm).scalar();
      v = orig;
      const double num = (fp - fm) / (2 * h);
      const double ana = g.data()[k];
      diff += (ana - num) * (ana - num);
      na += ana * ana;
      nn_ += num * num;
      ++out.checked_entries;
    }
    const double rel = std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nn_), floor);
    if (rel >= out.max_rel_error) {
      out.max_rel_error = rel;
      out.worst = p->name;
    }
  }
  return out;
}

/// Fixed random weights for turning a matrix output into a scalar loss.
inline nn::Matrix random_weights(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  nn::Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = d(rng);
  return m;
}

}  // namespace trajpred::testing
