#pragma once

#include <random>
#include <string>
#include <vector>

#include "trajpred/autodiff/tape.hpp"

namespace trajpred::nn {

using ad::Matrix;
using ad::Parameter;
using ad::Tape;
using ad::Var;
using Rng = std::mt19937_64;

using ParamRefs = std::vector<Parameter*>;
using ConstParamRefs = std::vector<const Parameter*>;

/// Glorot-uniform initialised (rows x cols) parameter.
Parameter xavier(std::string name, int rows, int cols, Rng& rng);
Parameter zeros(std::string name, int rows, int cols);
Parameter constant(std::string name, int rows, int cols, double value);

/// Sum of squared entries across parameters.
double squared_norm(const ConstParamRefs& params);
ConstParamRefs as_const(const ParamRefs& params);

struct Linear {
  Parameter weight;  // out x in
  Parameter bias;    // out x 1

  Linear() = default;
  Linear(const std::string& name, int in, int out, Rng& rng);

  int in_dim() const { return static_cast<int>(weight.value.cols()); }
  int out_dim() const { return static_cast<int>(weight.value.rows()); }

  Var forward(Tape& tape, Var x, bool trainable = true) const;
  void collect(ParamRefs& out);
  void collect(ConstParamRefs& out) const;
};

enum class Activation { tanh, relu };

/// Fully connected stack; the activation is applied between layers, not after the last.
struct Mlp {
  std::vector<Linear> layers;
  Activation activation = Activation::tanh;

  Mlp() = default;
  Mlp(const std::string& name, const std::vector<int>& dims, Activation act, Rng& rng);

  Var forward(Tape& tape, Var x, bool trainable = true) const;
  /// Plain evaluation without recording gradients.
  Matrix evaluate(const Matrix& x) const;
  void collect(ParamRefs& out);
  void collect(ConstParamRefs& out) const;
};

/// Gated recurrent unit cell (reset, update, candidate gate ordering).
struct GruCell {
  Parameter w_ih;  // 3H x in
  Parameter w_hh;  // 3H x H
  Parameter b_ih;  // 3H x 1
  Parameter b_hh;  // 3H x 1

  GruCell() = default;
  GruCell(const std::string& name, int in, int hidden, Rng& rng);

  int hidden() const { return static_cast<int>(w_hh.value.cols()); }
  int in_dim() const { return static_cast<int>(w_ih.value.cols()); }

  Var step(Tape& tape, Var x, Var h, bool trainable = true) const;
  void collect(ParamRefs& out);
  void collect(ConstParamRefs& out) const;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 1.0;  // <= 0 disables clipping
};

class Adam {
 public:
  Adam(ParamRefs params, AdamConfig cfg);

  /// Applies one update using the gradients recorded on `tape`.
  void step(const Tape& tape);
  /// Applies one update with explicit gradients (same order as params).
  void step(std::vector<Matrix> grads);

  double last_grad_norm() const { return last_norm_; }
  long steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }

 private:
  ParamRefs params_;
  AdamConfig cfg_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long t_ = 0;
  double last_norm_ = 0.0;
};

}  // namespace trajpred::nn
