#pragma once

// Minimal reverse-mode automatic differentiation over dense Eigen matrices.
//
// Layout convention used throughout the toolkit: features along rows, batch
// along columns. A Tape records every operation; backward() walks it in
// reverse and accumulates gradients. Tapes are single-use and not thread safe.

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace trajpred::ad {

using Matrix = Eigen::MatrixXd;

/// A named learnable tensor. Gradients live on the tape, not here.
struct Parameter {
  std::string name;
  Matrix value;
};

class Tape;

/// Handle to a node on a tape.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* t, int id) : tape_(t), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  Tape() { nodes_.reserve(1024); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  /// Leaf whose gradient can be read back with grad().
  Var variable(Matrix value);
  /// Binds a parameter. Repeated binds of the same parameter return the same
  /// node. With trainable=false the value enters as a constant.
  Var param(const Parameter& p, bool trainable = true);

  /// Records an op. `inputs` decides whether the node participates in backward.
  Var record(Matrix value, std::initializer_list<Var> inputs, Backward backward);
  Var record(Matrix value, std::span<const Var> inputs, Backward backward);

  /// Seeds d(loss)/d(loss) = 1 and propagates. `loss` must be 1x1.
  void backward(Var loss);

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }
  /// Gradient w.r.t. a node; zeros if nothing flowed into it.
  Matrix grad(Var v) const;
  /// Gradient w.r.t. a bound parameter; zeros if it was never bound.
  Matrix grad(const Parameter& p) const;

  /// Adds `g` into the gradient buffer of node `id` (used by op backwards).
  template <typename Derived>
  void accumulate(int id, const Eigen::MatrixBase<Derived>& g) {
    auto& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }
  const Matrix& upstream(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    bool needs_grad = false;
  };
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, int> bound_;
};

// ---- elementwise and linear-algebra ops -----------------------------------

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var neg(Var a);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var matmul(Var a, Var b);

/// a (r x c) + col (r x 1) broadcast over columns.
Var add_col(Var a, Var col);
/// a (r x c) * row (1 x c) broadcast down rows.
Var mul_row(Var a, Var row);
/// a (r x c) * col (r x 1) broadcast over columns.
Var mul_col(Var a, Var col);

Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var leaky_relu(Var a, double slope);
Var softplus(Var a);
Var exp(Var a);
Var square(Var a);
Var sqrt(Var a, double eps = 0.0);
/// (e^z - 1) / z with the limit 1 at z = 0; the zero-order-hold input factor.
Var expm1_over_x(Var a);

// ---- reductions ----------------------------------------------------------

Var sum(Var a);        // 1x1
Var mean(Var a);       // 1x1
Var col_sums(Var a);   // 1 x c
Var row_sums(Var a);   // r x 1
Var logsumexp(Var a);  // 1x1 over all elements

// ---- structural ------------------------------------------------------------

Var concat_rows(std::span<const Var> parts);
Var concat_rows(std::initializer_list<Var> parts);
Var concat_cols(std::span<const Var> parts);
Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
/// Column k of the result is column idx[k] of a.
Var gather_cols(Var a, std::vector<int> idx);
/// Each row repeated `times` consecutively: row r -> rows [r*times, (r+1)*times).
Var repeat_rows(Var a, Eigen::Index times);
/// Whole block stacked `times` times vertically.
Var tile_rows(Var a, Eigen::Index times);
/// Sums consecutive groups of `group` rows: (g*n x c) -> (n x c).
Var group_sum_rows(Var a, Eigen::Index group);
/// Softmax of a 1 x K row within contiguous segments given by `segment_of`
/// (segment id per column, non-decreasing).
Var segment_softmax(Var row, std::vector<int> segment_of);
/// Sums columns by segment id: (r x K) -> (r x n_segments).
Var segment_sum_cols(Var a, std::vector<int> segment_of, int n_segments);

// Operator sugar.
inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator*(double s, Var a) { return scale(a, s); }
inline Var operator-(Var a) { return neg(a); }

}  // namespace trajpred::ad
