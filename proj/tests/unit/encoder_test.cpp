#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "support/encoder_cases.hpp"
#include "support/gradcheck.hpp"
#include "trajpred/model/encoder.hpp"
#include "trajpred/model/features.hpp"

namespace trajpred {
namespace {

using namespace model;
using nn::Matrix;
using nn::Tape;

EncoderParams tiny_encoder(std::uint64_t seed) { return testing::random_encoder(seed); }

std::vector<PredictionInstance> scene(int n_agents, std::uint64_t seed) { return testing::random_scene(n_agents, seed); }

double leaky(double x) { return x > 0 ? x : kAttentionSlope * x; }

TEST(Encoder, ZeroWeightCellGivesZeroHidden) {
  auto p = tiny_encoder(1);
  for (auto* w : {&p.gru.w_ih, &p.gru.w_hh, &p.gru.b_ih, &p.gru.b_hh}) w->value.setZero();
  const auto batch = make_batch(scene(4, 2), {});
  Tape t;
  EXPECT_EQ(encode_node_histories(t, p, batch).value().norm(), 0.0);
}

TEST(Encoder, FullyMaskedNodeKeepsInitialState) {
  const auto p = tiny_encoder(2);
  auto batch = make_batch(scene(3, 4), {});
  for (auto& m : batch.node_masks) m(0, 1) = 0.0;
  Tape t;
  const Matrix h = encode_node_histories(t, p, batch).value();
  EXPECT_EQ(h.col(1).norm(), 0.0);
  EXPECT_GT(h.col(0).norm(), 0.0);
}

TEST(Encoder, AttentionSumsToOneOnRandomGraphs) {
  const auto p = tiny_encoder(3);
  for (int n = 1; n <= 16; ++n) {
    const auto inst = scene(n, static_cast<std::uint64_t>(n));
    const auto batch = make_batch(inst, {});
    Tape t;
    const Matrix w = attention_weights(t, p, encode_node_histories(t, p, batch), batch.edges).value();
    std::vector<double> sums(static_cast<std::size_t>(batch.edges.n_segments), 0.0);
    for (Eigen::Index k = 0; k < w.cols(); ++k) {
      EXPECT_GT(w(0, k), 0.0);
      sums[static_cast<std::size_t>(batch.edges.segment[static_cast<std::size_t>(k)])] += w(0, k);
    }
    for (double s : sums) EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(Encoder, SingletonWeightIsOne) {
  const auto p = tiny_encoder(4);
  const auto batch = make_batch(scene(1, 5), {});
  Tape t;
  const Matrix w = attention_weights(t, p, encode_node_histories(t, p, batch), batch.edges).value();
  ASSERT_EQ(w.cols(), 1);
  EXPECT_EQ(w(0, 0), 1.0);
}

TEST(Encoder, IdenticalCoLocatedAgentsShareWeightEqually) {
  const auto p = tiny_encoder(5);
  std::vector<Trajectory> rec;
  for (const char* id : {"a", "b", "c"}) rec.push_back(testing::line(id, 2, 1, 3, -1, 10));
  const auto batch = make_batch(window_instances(rec, 5, 3, 100), {});
  Tape t;
  const Matrix w = attention_weights(t, p, encode_node_histories(t, p, batch), batch.edges).value();
  for (Eigen::Index k = 0; k < w.cols(); ++k) EXPECT_NEAR(w(0, k), 1.0 / 3.0, 1e-12);
}

TEST(Encoder, AttentionAndUpdateMatchDirectEvaluation) {
  const auto p = tiny_encoder(6);
  const auto batch = make_batch(scene(5, 6), {});
  Tape t;
  auto nodes = encode_node_histories(t, p, batch);
  auto wv = attention_weights(t, p, nodes, batch.edges);
  const Matrix out = gat_update(t, p, nodes, wv, batch.edges).value();
  const Matrix h = nodes.value();
  const auto& e = batch.edges;
  const auto K = static_cast<Eigen::Index>(e.src.size());
  Eigen::VectorXd logits(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    Eigen::VectorXd z(2 * h.rows() + kEdgeDim);
    z << h.col(e.src[static_cast<std::size_t>(k)]), h.col(e.dst[static_cast<std::size_t>(k)]), e.features.col(k);
    Eigen::VectorXd a = p.score_proj.value * z;
    double s = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) s += p.score_vec.value(i, 0) * leaky(a(i));
    logits(k) = s;
  }
  Matrix expect_out = p.bias.value.replicate(1, e.n_segments);
  for (int seg = 0; seg < e.n_segments; ++seg) {
    double mx = -1e300, z = 0;
    for (Eigen::Index k = 0; k < K; ++k)
      if (e.segment[static_cast<std::size_t>(k)] == seg) mx = std::max(mx, logits(k));
    for (Eigen::Index k = 0; k < K; ++k)
      if (e.segment[static_cast<std::size_t>(k)] == seg) z += std::exp(logits(k) - mx);
    for (Eigen::Index k = 0; k < K; ++k) {
      if (e.segment[static_cast<std::size_t>(k)] != seg) continue;
      const double alpha = std::exp(logits(k) - mx) / z;
      EXPECT_NEAR(wv.value()(0, k), alpha, 1e-12);
      expect_out.col(seg) += alpha * p.value_proj.value * h.col(e.dst[static_cast<std::size_t>(k)]);
    }
  }
  EXPECT_LT((out - expect_out).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Encoder, IsolatedTargetIsBiasPlusProjection) {
  auto p = tiny_encoder(7);
  const auto batch = make_batch(scene(1, 8), {});
  Tape t;
  const Matrix h = encode_node_histories(t, p, batch).value();
  const Matrix hl = encode(t, p, batch, true).value();
  EXPECT_LT((hl - (p.bias.value + p.value_proj.value * h)).norm(), 1e-12);
  p.value_proj.value.setIdentity();
  p.bias.value.setZero();
  Tape t2;
  EXPECT_LT((encode(t2, p, batch, true).value() - h).norm(), 1e-12);
}

TEST(Encoder, AllEqualNeighborsIgnoreWeights) {
  const auto p = tiny_encoder(8);
  std::vector<Trajectory> rec;
  for (const char* id : {"a", "b", "c", "d"}) rec.push_back(testing::line(id, 0, 0, 1, 1, 10));
  const auto batch = make_batch(window_instances(rec, 5, 3, 100), {});
  Tape t;
  const Matrix h = encode_node_histories(t, p, batch).value();
  const Matrix hl = encode(t, p, batch, true).value();
  EXPECT_LT((hl.col(0) - (p.bias.value + p.value_proj.value * h.col(0))).norm(), 1e-12);
}

TEST(Encoder, NeighborPermutationInvariance) {
  const auto p = tiny_encoder(9);
  auto inst = scene(6, 10);
  Tape t;
  const Matrix base = encode(t, p, make_batch(inst, {}), true).value();
  std::mt19937_64 rng(1);
  for (auto& i : inst) {
    std::vector<std::size_t> order(i.neighbor_histories.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    auto hist = i.neighbor_histories;
    auto fut = i.neighbor_futures;
    for (std::size_t k = 0; k < order.size(); ++k) {
      i.neighbor_histories[k] = hist[order[k]];
      if (!fut.empty()) i.neighbor_futures[k] = fut[order[k]];
    }
  }
  Tape t2;
  const Matrix permuted = encode(t2, p, make_batch(inst, {}), true).value();
  EXPECT_LT((base - permuted).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Encoder, Deterministic) {
  const auto p = tiny_encoder(10);
  const auto batch = make_batch(scene(4, 11), {});
  Tape a, b;
  EXPECT_EQ(encode(a, p, batch, true).value(), encode(b, p, batch, true).value());
}

TEST(Encoder, GradientsMatchFiniteDifferences) {
  int cases = 0;
  for (std::uint64_t seed = 1; cases < 20; ++seed) {
    auto p = tiny_encoder(seed);
    const auto batch = make_batch(scene(4, seed + 50), {});
    if (testing::attention_kink_margin(p, batch) < testing::kKinkMargin) continue;
    ++cases;
    nn::ParamRefs ps;
    p.collect(ps);
    const Matrix w = testing::random_weights(p.hidden(), batch.batch_size, seed + 9);
    auto loss = [&](Tape& t) { return ad::sum(ad::mul(encode(t, p, batch, true), t.constant(w))); };
    const auto r = testing::gradcheck(ps, loss, 1e-3, 6, seed);
    EXPECT_LT(r.max_rel_error, 1e-4) << "seed " << seed << " worst " << r.worst;
  }
}

}  // namespace
}  // namespace trajpred
