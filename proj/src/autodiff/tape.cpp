#include "trajpred/autodiff/tape.hpp"

#include <cmath>
#include <limits>

#include "trajpred/core/error.hpp"

namespace trajpred::ad {

const Matrix& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, {}, false});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::variable(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, {}, true});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::param(const Parameter& p, bool trainable) {
  if (!trainable) return constant(p.value);
  if (auto it = bound_.find(&p); it != bound_.end()) return Var(this, it->second);
  Var v = variable(p.value);
  bound_.emplace(&p, v.id());
  return v;
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward));
}

Var Tape::record(Matrix value, std::span<const Var> inputs, Backward backward) {
  bool needs = false;
  for (const auto& in : inputs) needs = needs || needs_grad(in.id());
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs;
  if (needs) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw InvalidInput("backward on a variable from another tape");
  if (loss.rows() != 1 || loss.cols() != 1) throw InvalidInput("backward needs a scalar loss");
  auto& root = nodes_[static_cast<std::size_t>(loss.id())];
  if (!root.needs_grad) return;
  root.grad = Matrix::Ones(1, 1);
  for (int id = loss.id(); id >= 0; --id) {
    auto& n = nodes_[static_cast<std::size_t>(id)];
    if (n.backward && n.grad.size() != 0) n.backward(*this, id);
  }
}

Matrix Tape::grad(Var v) const {
  const auto& n = nodes_[static_cast<std::size_t>(v.id())];
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Matrix Tape::grad(const Parameter& p) const {
  auto it = bound_.find(&p);
  if (it == bound_.end()) return Matrix::Zero(p.value.rows(), p.value.cols());
  return grad(Var(const_cast<Tape*>(this), it->second));
}

namespace {

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidInput(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                       std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                       std::to_string(b.cols()));
  }
}

template <typename F>
Var unary(Var a, Matrix value, F&& local_grad) {
  const int ia = a.id();
  return a.tape()->record(std::move(value), {a}, [ia, local_grad](Tape& t, int self) {
    t.accumulate(ia, local_grad(t.upstream(self), t.value(ia), t.value(self)));
  });
}

}  // namespace

Var add(Var a, Var b) {
  check_same_shape(a, b, "add");
  const int ia = a.id(), ib = b.id();
  return a.tape()->record(a.value() + b.value(), {a, b}, [ia, ib](Tape& t, int self) {
    t.accumulate(ia, t.upstream(self));
    t.accumulate(ib, t.upstream(self));
  });
}

Var sub(Var a, Var b) {
  check_same_shape(a, b, "sub");
  const int ia = a.id(), ib = b.id();
  return a.tape()->record(a.value() - b.value(), {a, b}, [ia, ib](Tape& t, int self) {
    t.accumulate(ia, t.upstream(self));
    t.accumulate(ib, -t.upstream(self));
  });
}

Var mul(Var a, Var b) {
  check_same_shape(a, b, "mul");
  const int ia = a.id(), ib = b.id();
  return a.tape()->record(a.value().cwiseProduct(b.value()), {a, b}, [ia, ib](Tape& t, int self) {
    const auto& g = t.upstream(self);
    if (t.needs_grad(ia)) t.accumulate(ia, g.cwiseProduct(t.value(ib)));
    if (t.needs_grad(ib)) t.accumulate(ib, g.cwiseProduct(t.value(ia)));
  });
}

Var neg(Var a) { return scale(a, -1.0); }

Var scale(Var a, double s) {
  return unary(a, a.value() * s, [s](const Matrix& g, const Matrix&, const Matrix&) -> Matrix { return g * s; });
}

Var add_scalar(Var a, double s) {
  return unary(a, (a.value().array() + s).matrix(),
               [](const Matrix& g, const Matrix&, const Matrix&) -> Matrix { return g; });
}

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) {
    throw InvalidInput("matmul: inner dimensions " + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()));
  }
  const int ia = a.id(), ib = b.id();
  return a.tape()->record(a.value() * b.value(), {a, b}, [ia, ib](Tape& t, int self) {
    const auto& g = t.upstream(self);
    if (t.needs_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
    if (t.needs_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
  });
}

Var add_col(Var a, Var col) {
  if (col.cols() != 1 || col.rows() != a.rows()) throw InvalidInput("add_col: expected r x 1 column");
  const int ia = a.id(), ic = col.id();
  Matrix v = a.value().colwise() + col.value().col(0);
  return a.tape()->record(std::move(v), {a, col}, [ia, ic](Tape& t, int self) {
    const auto& g = t.upstream(self);
    t.accumulate(ia, g);
    if (t.needs_grad(ic)) t.accumulate(ic, g.rowwise().sum());
  });
}

Var mul_row(Var a, Var row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw InvalidInput("mul_row: expected 1 x c row");
  const int ia = a.id(), ir = row.id();
  Matrix v = (a.value().array().rowwise() * row.value().row(0).array()).matrix();
  return a.tape()->record(std::move(v), {a, row}, [ia, ir](Tape& t, int self) {
    const auto& g = t.upstream(self);
    if (t.needs_grad(ia)) {
      t.accumulate(ia, (g.array().rowwise() * t.value(ir).row(0).array()).matrix());
    }
    if (t.needs_grad(ir)) t.accumulate(ir, g.cwiseProduct(t.value(ia)).colwise().sum());
  });
}

Var mul_col(Var a, Var col) {
  if (col.cols() != 1 || col.rows() != a.rows()) throw InvalidInput("mul_col: expected r x 1 column");
  const int ia = a.id(), ic = col.id();
  Matrix v = (a.value().array().colwise() * col.value().col(0).array()).matrix();
  return a.tape()->record(std::move(v), {a, col}, [ia, ic](Tape& t, int self) {
    const auto& g = t.upstream(self);
    if (t.needs_grad(ia)) {
      t.accumulate(ia, (g.array().colwise() * t.value(ic).col(0).array()).matrix());
    }
    if (t.needs_grad(ic)) t.accumulate(ic, g.cwiseProduct(t.value(ia)).rowwise().sum());
  });
}

Var sigmoid(Var a) {
  Matrix v = a.value().unaryExpr([](double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  return unary(a, std::move(v), [](const Matrix& g, const Matrix&, const Matrix& y) -> Matrix {
    return (g.array() * y.array() * (1.0 - y.array())).matrix();
  });
}

Var tanh(Var a) {
  Matrix v = a.value().array().tanh().matrix();
  return unary(a, std::move(v), [](const Matrix& g, const Matrix&, const Matrix& y) -> Matrix {
    return (g.array() * (1.0 - y.array().square())).matrix();
  });
}

Var relu(Var a) {
  Matrix v = a.value().cwiseMax(0.0);
  return unary(a, std::move(v), [](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix {
    return (g.array() * (x.array() > 0.0).cast<double>()).matrix();
  });
}

Var leaky_relu(Var a, double slope) {
  Matrix v = a.value().unaryExpr([slope](double x) { return x > 0 ? x : slope * x; });
  return unary(a, std::move(v), [slope](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix {
    return (g.array() * x.array().unaryExpr([slope](double z) { return z > 0 ? 1.0 : slope; })).matrix();
  });
}

Var softplus(Var a) {
  Matrix v = a.value().unaryExpr([](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); });
  return unary(a, std::move(v), [](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix {
    return (g.array() * x.array().unaryExpr([](double z) {
      if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
      const double e = std::exp(z);
      return e / (1.0 + e);
    })).matrix();
  });
}

Var exp(Var a) {
  // Results below the smallest normal double become 0: subnormal operands
  // make every later multiply in a decaying recurrence far slower.
  Matrix v = a.value().array().exp().matrix().unaryExpr(
      [](double e) { return e < std::numeric_limits<double>::min() ? 0.0 : e; });
  return unary(a, std::move(v), [](const Matrix& g, const Matrix&, const Matrix& y) -> Matrix {
    return g.cwiseProduct(y);
  });
}

Var square(Var a) {
  Matrix v = a.value().array().square().matrix();
  return unary(a, std::move(v), [](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix {
    return (2.0 * g.array() * x.array()).matrix();
  });
}

Var sqrt(Var a, double eps) {
  Matrix v = (a.value().array() + eps).sqrt().matrix();
  return unary(a, std::move(v), [](const Matrix& g, const Matrix&, const Matrix& y) -> Matrix {
    return (g.array() / (2.0 * y.array())).matrix();
  });
}

namespace {

double phi1(double z) {
  if (std::abs(z) < 1e-2) {
    return 1.0 + z * (1.0 / 2 + z * (1.0 / 6 + z * (1.0 / 24 + z * (1.0 / 120 + z * (1.0 / 720 + z / 5040)))));
  }
  return std::expm1(z) / z;
}

double phi1_prime(double z) {
  if (std::abs(z) < 1e-2) {
    return 1.0 / 2 + z * (1.0 / 3 + z * (1.0 / 8 + z * (1.0 / 30 + z * (1.0 / 144 + z * (1.0 / 840 + z / 5760)))));
  }
  return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

}  // namespace

Var expm1_over_x(Var a) {
  Matrix v = a.value().unaryExpr([](double z) { return phi1(z); });
  return unary(a, std::move(v), [](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix {
    return (g.array() * x.array().unaryExpr([](double z) { return phi1_prime(z); })).matrix();
  });
}

Var sum(Var a) {
  Matrix v(1, 1);
  v(0, 0) = a.value().sum();
  return unary(a, std::move(v), [](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix {
    return Matrix::Constant(x.rows(), x.cols(), g(0, 0));
  });
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  if (n == 0) throw InvalidInput("mean of empty matrix");
  Matrix v(1, 1);
  v(0, 0) = a.value().sum() / n;
  return unary(a, std::move(v), [n](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix {
    return Matrix::Constant(x.rows(), x.cols(), g(0, 0) / n);
  });
}

Var col_sums(Var a) {
  Matrix v = a.value().colwise().sum();
  return unary(a, std::move(v), [](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix {
    return g.replicate(x.rows(), 1);
  });
}

Var row_sums(Var a) {
  Matrix v = a.value().rowwise().sum();
  return unary(a, std::move(v), [](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix {
    return g.replicate(1, x.cols());
  });
}

Var logsumexp(Var a) {
  if (a.value().size() == 0) throw InvalidInput("logsumexp of empty matrix");
  const double m = a.value().maxCoeff();
  Matrix v(1, 1);
  v(0, 0) = m + std::log((a.value().array() - m).exp().sum());
  return unary(a, std::move(v), [](const Matrix& g, const Matrix& x, const Matrix& y) -> Matrix {
    return ((x.array() - y(0, 0)).exp() * g(0, 0)).matrix();
  });
}

Var concat_rows(std::initializer_list<Var> parts) {
  return concat_rows(std::span<const Var>(parts.begin(), parts.size()));
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw InvalidInput("concat_rows of nothing");
  const Eigen::Index cols = parts[0].cols();
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw InvalidInput("concat_rows: column mismatch");
    rows += p.rows();
  }
  Matrix v(rows, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    v.middleRows(off, p.rows()) = p.value();
    ids.push_back(p.id());
    offsets.push_back(off);
    off += p.rows();
  }
  return parts[0].tape()->record(std::move(v), parts, [ids, offsets](Tape& t, int self) {
    const auto& g = t.upstream(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!t.needs_grad(ids[k])) continue;
      t.accumulate(ids[k], g.middleRows(offsets[k], t.value(ids[k]).rows()));
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw InvalidInput("concat_cols of nothing");
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw InvalidInput("concat_cols: row mismatch");
    cols += p.cols();
  }
  Matrix v(rows, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    v.middleCols(off, p.cols()) = p.value();
    ids.push_back(p.id());
    offsets.push_back(off);
    off += p.cols();
  }
  return parts[0].tape()->record(std::move(v), parts, [ids, offsets](Tape& t, int self) {
    const auto& g = t.upstream(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!t.needs_grad(ids[k])) continue;
      t.accumulate(ids[k], g.middleCols(offsets[k], t.value(ids[k]).cols()));
    }
  });
}

Var slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) throw InvalidInput("slice_rows out of range");
  return unary(a, a.value().middleRows(start, count), [start, count](const Matrix& g, const Matrix& x,
                                                                    const Matrix&) -> Matrix {
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    out.middleRows(start, count) = g;
    return out;
  });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) throw InvalidInput("slice_cols out of range");
  return unary(a, a.value().middleCols(start, count), [start, count](const Matrix& g, const Matrix& x,
                                                                    const Matrix&) -> Matrix {
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    out.middleCols(start, count) = g;
    return out;
  });
}

Var gather_cols(Var a, std::vector<int> idx) {
  Matrix v(a.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= a.cols()) throw InvalidInput("gather_cols index out of range");
    v.col(static_cast<Eigen::Index>(k)) = a.value().col(idx[k]);
  }
  return unary(a, std::move(v), [idx = std::move(idx)](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix {
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) out.col(idx[k]) += g.col(static_cast<Eigen::Index>(k));
    return out;
  });
}

Var repeat_rows(Var a, Eigen::Index times) {
  const Eigen::Index r = a.rows();
  Matrix v(r * times, a.cols());
  for (Eigen::Index i = 0; i < r; ++i) v.middleRows(i * times, times) = a.value().row(i).replicate(times, 1);
  return unary(a, std::move(v), [times](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix {
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out.row(i) = g.middleRows(i * times, times).colwise().sum();
    return out;
  });
}

Var tile_rows(Var a, Eigen::Index times) {
  Matrix v = a.value().replicate(times, 1);
  return unary(a, std::move(v), [times](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix {
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    for (Eigen::Index k = 0; k < times; ++k) out += g.middleRows(k * x.rows(), x.rows());
    return out;
  });
}

Var group_sum_rows(Var a, Eigen::Index group) {
  if (group <= 0 || a.rows() % group != 0) throw InvalidInput("group_sum_rows: rows not divisible by group");
  const Eigen::Index n = a.rows() / group;
  Matrix v(n, a.cols());
  for (Eigen::Index i = 0; i < n; ++i) v.row(i) = a.value().middleRows(i * group, group).colwise().sum();
  return unary(a, std::move(v), [group](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix {
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < g.rows(); ++i) out.middleRows(i * group, group) = g.row(i).replicate(group, 1);
    return out;
  });
}

Var segment_softmax(Var row, std::vector<int> segment_of) {
  if (row.rows() != 1 || row.cols() != static_cast<Eigen::Index>(segment_of.size())) {
    throw InvalidInput("segment_softmax: expected 1 x K row matching segment ids");
  }
  const auto& x = row.value();
  Matrix v(1, x.cols());
  const Eigen::Index K = x.cols();
  Eigen::Index begin = 0;
  while (begin < K) {
    Eigen::Index end = begin;
    while (end < K && segment_of[static_cast<std::size_t>(end)] == segment_of[static_cast<std::size_t>(begin)]) ++end;
    const double m = x.middleCols(begin, end - begin).maxCoeff();
    double z = 0.0;
    for (Eigen::Index k = begin; k < end; ++k) {
      v(0, k) = std::exp(x(0, k) - m);
      z += v(0, k);
    }
    for (Eigen::Index k = begin; k < end; ++k) v(0, k) /= z;
    begin = end;
  }
  return unary(row, std::move(v),
               [seg = std::move(segment_of)](const Matrix& g, const Matrix&, const Matrix& y) -> Matrix {
                 Matrix out(1, y.cols());
                 const Eigen::Index K = y.cols();
                 Eigen::Index b = 0;
                 while (b < K) {
                   Eigen::Index e = b;
                   while (e < K && seg[static_cast<std::size_t>(e)] == seg[static_cast<std::size_t>(b)]) ++e;
                   double dot = 0.0;
                   for (Eigen::Index k = b; k < e; ++k) dot += y(0, k) * g(0, k);
                   for (Eigen::Index k = b; k < e; ++k) out(0, k) = y(0, k) * (g(0, k) - dot);
                   b = e;
                 }
                 return out;
               });
}

Var segment_sum_cols(Var a, std::vector<int> segment_of, int n_segments) {
  if (a.cols() != static_cast<Eigen::Index>(segment_of.size())) {
    throw InvalidInput("segment_sum_cols: segment ids do not match columns");
  }
  Matrix v = Matrix::Zero(a.rows(), n_segments);
  for (std::size_t k = 0; k < segment_of.size(); ++k) {
    if (segment_of[k] < 0 || segment_of[k] >= n_segments) throw InvalidInput("segment id out of range");
    v.col(segment_of[k]) += a.value().col(static_cast<Eigen::Index>(k));
  }
  return unary(a, std::move(v),
               [seg = std::move(segment_of)](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix {
                 Matrix out(x.rows(), x.cols());
                 for (std::size_t k = 0; k < seg.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = g.col(seg[k]);
                 return out;
               });
}

}  // namespace trajpred::ad
