#include "trajpred/nn/layers.hpp"

#include <cmath>

#include "trajpred/core/error.hpp"

namespace trajpred::nn {

Parameter xavier(std::string name, int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
  }
  return {std::move(name), std::move(m)};
}

Parameter zeros(std::string name, int rows, int cols) { return {std::move(name), Matrix::Zero(rows, cols)}; }

Parameter constant(std::string name, int rows, int cols, double value) {
  return {std::move(name), Matrix::Constant(rows, cols, value)};
}

double squared_norm(const ConstParamRefs& params) {
  double s = 0.0;
  for (const auto* p : params) s += p->value.squaredNorm();
  return s;
}

ConstParamRefs as_const(const ParamRefs& params) { return {params.begin(), params.end()}; }

Linear::Linear(const std::string& name, int in, int out, Rng& rng)
    : weight(xavier(name + ".weight", out, in, rng)), bias(zeros(name + ".bias", out, 1)) {}

Var Linear::forward(Tape& tape, Var x, bool trainable) const {
  return ad::add_col(ad::matmul(tape.param(weight, trainable), x), tape.param(bias, trainable));
}

void Linear::collect(ParamRefs& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

void Linear::collect(ConstParamRefs& out) const {
  out.push_back(&weight);
  out.push_back(&bias);
}

Mlp::Mlp(const std::string& name, const std::vector<int>& dims, Activation act, Rng& rng) : activation(act) {
  if (dims.size() < 2) throw InvalidInput("mlp needs at least input and output dims");
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    layers.emplace_back(name + ".l" + std::to_string(i), dims[i], dims[i + 1], rng);
  }
}

Var Mlp::forward(Tape& tape, Var x, bool trainable) const {
  Var h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = layers[i].forward(tape, h, trainable);
    if (i + 1 < layers.size()) h = activation == Activation::tanh ? ad::tanh(h) : ad::relu(h);
  }
  return h;
}

Matrix Mlp::evaluate(const Matrix& x) const {
  Matrix h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = (layers[i].weight.value * h).colwise() + layers[i].bias.value.col(0);
    if (i + 1 < layers.size()) {
      if (activation == Activation::tanh) {
        h = h.array().tanh().matrix();
      } else {
        h = h.cwiseMax(0.0);
      }
    }
  }
  return h;
}

void Mlp::collect(ParamRefs& out) {
  for (auto& l : layers) l.collect(out);
}

void Mlp::collect(ConstParamRefs& out) const {
  for (const auto& l : layers) l.collect(out);
}

GruCell::GruCell(const std::string& name, int in, int hidden, Rng& rng)
    : w_ih(xavier(name + ".w_ih", 3 * hidden, in, rng)),
      w_hh(xavier(name + ".w_hh", 3 * hidden, hidden, rng)),
      b_ih(zeros(name + ".b_ih", 3 * hidden, 1)),
      b_hh(zeros(name + ".b_hh", 3 * hidden, 1)) {}

Var GruCell::step(Tape& tape, Var x, Var h, bool trainable) const {
  const Eigen::Index H = hidden();
  Var gi = ad::add_col(ad::matmul(tape.param(w_ih, trainable), x), tape.param(b_ih, trainable));
  Var gh = ad::add_col(ad::matmul(tape.param(w_hh, trainable), h), tape.param(b_hh, trainable));
  Var r = ad::sigmoid(ad::slice_rows(gi, 0, H) + ad::slice_rows(gh, 0, H));
  Var z = ad::sigmoid(ad::slice_rows(gi, H, H) + ad::slice_rows(gh, H, H));
  Var n = ad::tanh(ad::slice_rows(gi, 2 * H, H) + r * ad::slice_rows(gh, 2 * H, H));
  return n + z * (h - n);
}

void GruCell::collect(ParamRefs& out) {
  out.push_back(&w_ih);
  out.push_back(&w_hh);
  out.push_back(&b_ih);
  out.push_back(&b_hh);
}

void GruCell::collect(ConstParamRefs& out) const {
  out.push_back(&w_ih);
  out.push_back(&w_hh);
  out.push_back(&b_ih);
  out.push_back(&b_hh);
}

Adam::Adam(ParamRefs params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  for (const auto* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step(const Tape& tape) {
  std::vector<Matrix> grads;
  grads.reserve(params_.size());
  for (const auto* p : params_) grads.push_back(tape.grad(*p));
  step(std::move(grads));
}

void Adam::step(std::vector<Matrix> grads) {
  if (grads.size() != params_.size()) throw InvalidInput("adam: gradient count mismatch");
  double sq = 0.0;
  for (const auto& g : grads) sq += g.squaredNorm();
  last_norm_ = std::sqrt(sq);
  if (!std::isfinite(last_norm_)) throw TrainingFailure("non-finite gradient norm");
  const double clip = (cfg_.clip_norm > 0 && last_norm_ > cfg_.clip_norm) ? cfg_.clip_norm / last_norm_ : 1.0;
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Matrix g = grads[i] * clip;
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    params_[i]->value.array() -=
        cfg_.lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + cfg_.eps);
  }
}

}  // namespace trajpred::nn
