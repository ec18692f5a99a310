#include <gtest/gtest.h>

#include "support/gradcheck.hpp"

namespace trajpred {
namespace {

using nn::Matrix;
using nn::Parameter;
using nn::Tape;
using nn::Var;

Parameter rand_param(const std::string& name, int r, int c, std::uint64_t seed, double shift = 0.0) {
  Matrix m = testing::random_weights(r, c, seed);
  m.array() += shift;
  return {name, m};
}

// Contracts an op output with fixed weights to get a scalar loss.
using Op = std::function<Var(Tape&, Var, Var)>;

double check_binary(const Op& op, int ra, int ca, int rb, int cb, std::uint64_t seed, double shift = 0.0) {
  Parameter a = rand_param("a", ra, ca, seed, shift);
  Parameter b = rand_param("b", rb, cb, seed + 100, shift);
  Matrix w;
  auto loss = [&](Tape& t) {
    Var out = op(t, t.param(a), t.param(b));
    if (w.size() == 0) w = testing::random_weights(out.rows(), out.cols(), seed + 7);
    return ad::sum(ad::mul(out, t.constant(w)));
  };
  return testing::gradcheck({&a, &b}, loss, 1e-4, 50, seed).max_rel_error;
}

struct OpCase {
  std::string name;
  Op op;
  int ra, ca, rb, cb;
  double shift = 0.0;
};

std::vector<OpCase> cases() {
  using namespace ad;
  return {
      {"add", [](Tape&, Var a, Var b) { return a + b; }, 3, 4, 3, 4},
      {"sub", [](Tape&, Var a, Var b) { return a - b; }, 3, 4, 3, 4},
      {"mul", [](Tape&, Var a, Var b) { return a * b; }, 3, 4, 3, 4},
      {"matmul", [](Tape&, Var a, Var b) { return matmul(a, b); }, 3, 4, 4, 2},
      {"add_col", [](Tape&, Var a, Var b) { return add_col(a, b); }, 3, 5, 3, 1},
      {"mul_row", [](Tape&, Var a, Var b) { return mul_row(a, b); }, 3, 5, 1, 5},
      {"mul_col", [](Tape&, Var a, Var b) { return mul_col(a, b); }, 3, 5, 3, 1},
      {"sigmoid", [](Tape&, Var a, Var b) { return sigmoid(a) + b; }, 3, 3, 3, 3},
      {"tanh", [](Tape&, Var a, Var b) { return ad::tanh(a) * b; }, 3, 3, 3, 3},
      {"softplus", [](Tape&, Var a, Var b) { return softplus(a * b); }, 3, 3, 3, 3},
      {"exp", [](Tape&, Var a, Var b) { return ad::exp(scale(a, 0.5)) + square(b); }, 3, 3, 3, 3},
      {"sqrt", [](Tape&, Var a, Var b) { return ad::sqrt(square(a) + square(b), 1e-6); }, 3, 3, 3, 3},
      {"expm1_over_x", [](Tape&, Var a, Var b) { return expm1_over_x(a * b); }, 3, 3, 3, 3},
      {"reductions",
       [](Tape&, Var a, Var b) { return concat_cols(std::vector<Var>{col_sums(a), col_sums(b)}); }, 2, 3, 2, 3},
      {"row_sums", [](Tape&, Var a, Var b) { return row_sums(a * b); }, 3, 4, 3, 4},
      {"logsumexp", [](Tape&, Var a, Var b) { return add_scalar(logsumexp(a), 0.0) * mean(b); }, 3, 4, 2, 2},
      {"concat_slice",
       [](Tape&, Var a, Var b) { return slice_rows(concat_rows({a, b}), 1, 3); }, 2, 3, 2, 3},
      {"slice_cols", [](Tape&, Var a, Var b) { return slice_cols(a, 1, 2) * slice_cols(b, 0, 2); }, 2, 4, 2, 4},
      {"gather_cols", [](Tape&, Var a, Var b) { return gather_cols(a, {2, 0, 0, 1}) + gather_cols(b, {1, 1, 2, 0}); }, 2, 3, 2, 3},
      {"repeat_tile", [](Tape&, Var a, Var b) { return repeat_rows(a, 3) * tile_rows(b, 3); }, 2, 2, 2, 2},
      {"group_sum_rows", [](Tape&, Var a, Var b) { return group_sum_rows(a * b, 2); }, 6, 3, 6, 3},
      {"segment_softmax",
       [](Tape&, Var a, Var b) { return segment_softmax(a, {0, 0, 1, 1, 1, 2}) * b; }, 1, 6, 1, 6},
      {"segment_sum_cols", [](Tape&, Var a, Var b) { return segment_sum_cols(a * b, {0, 0, 1, 2, 2}, 3); }, 2, 5, 2, 5},
      {"leaky_relu", [](Tape&, Var a, Var b) { return leaky_relu(a, 0.2) * b; }, 3, 3, 3, 3},
      {"neg", [](Tape&, Var a, Var b) { return -a * b; }, 2, 2, 2, 2},
  };
}

TEST(Autodiff, OpGradientsMatchFiniteDifferences) {
  for (const auto& c : cases()) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      EXPECT_LT(check_binary(c.op, c.ra, c.ca, c.rb, c.cb, seed, c.shift), 1e-6) << c.name << " seed " << seed;
    }
  }
}

TEST(Autodiff, ExpM1OverXLimitIsOne) {
  Tape t;
  Matrix z(1, 3);
  z << 0.0, 1e-12, -1e-12;
  Var v = ad::expm1_over_x(t.constant(z));
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(v.value()(0, k), 1.0, 1e-11);
}

TEST(Autodiff, SegmentSoftmaxSumsToOnePerSegment) {
  Tape t;
  Matrix r = testing::random_weights(1, 7, 3);
  Var s = ad::segment_softmax(t.constant(r), {0, 0, 0, 1, 2, 2, 2});
  EXPECT_NEAR(s.value().leftCols(3).sum(), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(s.value()(0, 3), 1.0);
  EXPECT_NEAR(s.value().rightCols(3).sum(), 1.0, 1e-12);
}

TEST(Autodiff, ParamBindsOnceAndAccumulates) {
  Parameter p{"p", Matrix::Constant(1, 1, 3.0)};
  Tape t;
  Var a = t.param(p);
  Var b = t.param(p);
  EXPECT_EQ(a.id(), b.id());
  t.backward(ad::mul(a, b));
  EXPECT_DOUBLE_EQ(t.grad(p)(0, 0), 6.0);
}

TEST(Autodiff, FrozenParamGetsNoGradient) {
  Parameter p{"p", Matrix::Constant(2, 2, 1.5)};
  Tape t;
  Var a = t.param(p, false);
  t.backward(ad::sum(ad::square(a)));
  EXPECT_EQ(t.grad(p).norm(), 0.0);
}

TEST(Autodiff, BackwardRejectsNonScalar) {
  Tape t;
  Var v = t.variable(Matrix::Ones(2, 1));
  EXPECT_ANY_THROW(t.backward(v));
}

TEST(Layers, GruAndMlpGradients) {
  nn::Rng rng(3);
  nn::GruCell cell("gru", 3, 4, rng);
  nn::Mlp mlp("mlp", {4, 5, 2}, nn::Activation::tanh, rng);
  nn::ParamRefs ps;
  cell.collect(ps);
  mlp.collect(ps);
  const Matrix x0 = testing::random_weights(3, 2, 10), x1 = testing::random_weights(3, 2, 11);
  const Matrix w = testing::random_weights(2, 2, 12);
  auto loss = [&](Tape& t) {
    Var h = t.constant(Matrix::Zero(4, 2));
    h = cell.step(t, t.constant(x0), h);
    h = cell.step(t, t.constant(x1), h);
    return ad::sum(ad::mul(mlp.forward(t, h), t.constant(w)));
  };
  EXPECT_LT(testing::gradcheck(ps, loss, 1e-4, 20).max_rel_error, 1e-6);
}

TEST(Layers, AdamMinimisesQuadratic) {
  Parameter p{"p", Matrix::Constant(3, 1, 5.0)};
  nn::Adam opt({&p}, {0.1, 0.9, 0.999, 1e-8, 0.0});
  for (int k = 0; k < 500; ++k) {
    Tape t;
    Var v = t.param(p);
    t.backward(ad::sum(ad::square(add_scalar(v, -1.0))));
    opt.step(t);
  }
  EXPECT_NEAR((p.value.array() - 1.0).abs().maxCoeff(), 0.0, 1e-2);
  EXPECT_EQ(opt.steps(), 500);
}

TEST(Layers, AdamClipsGradientNorm) {
  Parameter p{"p", Matrix::Zero(2, 1)};
  nn::Adam opt({&p}, {1.0, 0.9, 0.999, 1e-8, 1.0});
  Matrix g(2, 1);
  g << 30.0, 40.0;
  opt.step({g});
  EXPECT_DOUBLE_EQ(opt.last_grad_norm(), 50.0);
}

}  // namespace
}  // namespace trajpred
