#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"
#include "trajpred/core/error.hpp"
#include "trajpred/model/decoder.hpp"
#include "trajpred/model/features.hpp"

namespace trajpred {
namespace {

using namespace model;
using nn::Matrix;
using nn::Tape;

struct Setup {
  DecoderParams p;
  Matrix latent;
  Matrix last;
};

Setup make(std::uint64_t seed, DecoderConfig cfg = testing::tiny_model().decoder, int batch = 3) {
  nn::Rng rng(seed);
  Setup s{DecoderParams(cfg, 4, rng), testing::random_weights(4, batch, seed + 1),
          0.3 * testing::random_weights(kStateDim, batch, seed + 2)};
  return s;
}

TEST(Decoder, HorizonControlsStepCount) {
  auto s = make(1);
  for (int h : {1, 7}) {
    Tape t;
    const auto r = rollout(t, s.p, t.constant(s.latent), t.constant(s.last), h);
    EXPECT_EQ(static_cast<int>(r.states.size()), h);
    EXPECT_EQ(static_cast<int>(r.xy.size()), h);
    EXPECT_EQ(r.xy[0].rows(), 2);
    EXPECT_EQ(r.xy[0].cols(), 3);
  }
}

TEST(Decoder, ZeroHeadWithoutPriorCopiesLastState) {
  DecoderConfig cfg = testing::tiny_model().decoder;
  cfg.kinematic_prior = false;
  auto s = make(2, cfg);
  s.p.head.weight.value.setZero();
  s.p.head.bias.value.setZero();
  Tape t;
  const auto r = rollout(t, s.p, t.constant(s.latent), t.constant(s.last), 5);
  for (const auto& xy : r.xy) EXPECT_LT((xy.value() - kPosScale * s.last.topRows(2)).norm(), 1e-12);
}

TEST(Decoder, ZeroHeadWithPriorIsConstantVelocity) {
  auto s = make(3);
  s.p.head.weight.value.setZero();
  s.p.head.bias.value.setZero();
  Tape t;
  const auto r = rollout(t, s.p, t.constant(s.latent), t.constant(s.last), 4);
  for (int k = 0; k < 4; ++k) {
    const Matrix expect =
        kPosScale * s.last.topRows(2) + (k + 1) * kDefaultDt * kVelScale * s.last.middleRows(2, 2);
    EXPECT_LT((r.xy[static_cast<std::size_t>(k)].value() - expect).norm(), 1e-12);
  }
}

TEST(Decoder, Deterministic) {
  auto s = make(4);
  Tape a, b;
  const auto ra = rollout(a, s.p, a.constant(s.latent), a.constant(s.last), 6);
  const auto rb = rollout(b, s.p, b.constant(s.latent), b.constant(s.last), 6);
  for (int k = 0; k < 6; ++k) EXPECT_EQ(ra.xy[static_cast<std::size_t>(k)].value(), rb.xy[static_cast<std::size_t>(k)].value());
}

TEST(Decoder, InferenceMatchesTapedRollout) {
  for (bool every_step : {true, false}) {
    DecoderConfig cfg = testing::tiny_model().decoder;
    cfg.latent_every_step = every_step;
    auto s = make(11, cfg);
    Tape t;
    const auto r = rollout(t, s.p, t.constant(s.latent), t.constant(s.last), 9, nullptr, false);
    const auto inf = rollout_inference(s.p, s.latent, s.last, 9);
    ASSERT_EQ(inf.size(), 9u);
    for (std::size_t k = 0; k < 9; ++k) EXPECT_LT((inf[k] - r.states[k].value()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Decoder, PositiveStepSizeAndStableModes) {
  auto s = make(5);
  EXPECT_TRUE((s.p.a_log.value.array().exp() > 0).all());  // A = -exp(a_log) < 0
}

TEST(Decoder, NonFiniteStateNamesStep) {
  auto s = make(6);
  s.p.head.bias.value(0, 0) = std::nan("");
  Tape t;
  try {
    rollout(t, s.p, t.constant(s.latent), t.constant(s.last), 3);
    FAIL() << "expected NumericalDivergence";
  } catch (const NumericalDivergence& e) {
    EXPECT_EQ(e.step(), 1);
  }
}

TEST(Decoder, TeacherForcingFeedsGroundTruth) {
  auto s = make(7);
  std::vector<Matrix> teacher = {0.1 * testing::random_weights(kStateDim, 3, 70)};
  Tape t1, t2;
  const auto free = rollout(t1, s.p, t1.constant(s.latent), t1.constant(s.last), 2);
  const auto forced = rollout(t2, s.p, t2.constant(s.latent), t2.constant(s.last), 2, &teacher);
  EXPECT_EQ(free.states[0].value(), forced.states[0].value());
  EXPECT_NE(free.states[1].value(), forced.states[1].value());
}

TEST(Decoder, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    DecoderConfig cfg = testing::tiny_model().decoder;
    auto s = make(seed, cfg);
    nn::ParamRefs ps;
    s.p.collect(ps);
    const Matrix w = testing::random_weights(2, 3, seed + 40);
    auto loss = [&](Tape& t) {
      const auto r = rollout(t, s.p, t.constant(s.latent), t.constant(s.last), 5);
      nn::Var acc = ad::sum(ad::mul(r.xy[0], t.constant(w)));
      for (std::size_t k = 1; k < r.xy.size(); ++k) acc = acc + ad::sum(ad::mul(r.xy[k], t.constant(w)));
      return acc;
    };
    const auto r = testing::gradcheck(ps, loss, 1e-3, 6, seed);
    EXPECT_LT(r.max_rel_error, 1e-4) << "seed " << seed << " worst " << r.worst;
  }
}

TEST(Decoder, NonSelectiveVariantRuns) {
  DecoderConfig cfg = testing::tiny_model().decoder;
  cfg.selective = false;
  cfg.gated = false;
  cfg.residual = false;
  auto s = make(8, cfg);
  Tape t;
  const auto r = rollout(t, s.p, t.constant(s.latent), t.constant(s.last), 3);
  EXPECT_TRUE(r.xy.back().value().allFinite());
}

}  // namespace
}  // namespace trajpred
