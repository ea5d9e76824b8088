#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "relsum/error.hpp"
#include "relsum/trainer.hpp"

using namespace relsum;

namespace {

struct Fixture {
  SummarizerModel model;
  std::vector<TrainingExample> data;
};

Fixture make_fixture(std::size_t targets) {
  Rng rng(21);
  std::vector<std::string> vocab = {std::string(kUnknownToken)};
  for (int i = 1; i < 10; ++i) vocab.push_back("w" + std::to_string(i));
  Fixture s{SummarizerModel::initialize(6, {2, 3}, vocab, rng), {}};
  for (std::size_t t = 0; t < targets; ++t) {
    TrainingExample ex;
    ex.target_id = "t" + std::to_string(t);
    auto sentence = [&] {
      std::vector<int> ids;
      for (int k = 0; k < 6; ++k) ids.push_back(static_cast<int>(rng.below(10)));
      return ids;
    };
    ex.input.references = {{"r1", {sentence(), sentence(), sentence()}}, {"r2", {sentence(), sentence()}}};
    ex.input.target = {ex.target_id, {sentence()}};
    ex.input.target_node = Eigen::VectorXd::Constant(6, 0.1);
    ex.input.reference_nodes = {Eigen::VectorXd::Constant(6, 0.2), Eigen::VectorXd::Constant(6, -0.2)};
    ex.labels = {1, 0, 0, 1, 0};
    s.data.push_back(std::move(ex));
  }
  return s;
}

}  // namespace

TEST(Train, MemorisableTargetLossDrops) {
  Fixture s = make_fixture(1);
  const double before = forward_loss(s.model, AttentionConfig::all(), s.data[0].input, s.data[0].labels);
  TrainOptions o;
  o.adam.learning_rate = 0.01;
  const TrainResult r = train(s.model, AttentionConfig::all(), s.data, o);
  ASSERT_EQ(r.epoch_mean_loss.size(), 20u);
  EXPECT_NEAR(r.epoch_mean_loss.front(), before, 1e-12);
  const double after = forward_loss(r.model, AttentionConfig::all(), s.data[0].input, s.data[0].labels);
  EXPECT_LT(after, before);
}

TEST(Train, ZeroLearningRateIsIdentity) {
  Fixture s = make_fixture(3);
  TrainOptions o;
  o.epochs = 3;
  o.adam.learning_rate = 0.0;
  EXPECT_TRUE(train(s.model, AttentionConfig::all(), s.data, o).model == s.model);
}

TEST(Train, BitReproducible) {
  Fixture s = make_fixture(4);
  TrainOptions o;
  o.epochs = 3;
  o.seed = 8;
  const TrainResult a = train(s.model, AttentionConfig::all(), s.data, o);
  const TrainResult b = train(s.model, AttentionConfig::all(), s.data, o);
  EXPECT_TRUE(a.model == b.model);
  EXPECT_EQ(a.epoch_mean_loss, b.epoch_mean_loss);
}

TEST(Train, NonFiniteNamesTarget) {
  Fixture s = make_fixture(2);
  s.data[1].input.target_node(0) = std::numeric_limits<double>::quiet_NaN();
  TrainOptions o;
  o.epochs = 1;
  o.shuffle = false;
  try {
    train(s.model, AttentionConfig::all(), s.data, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::non_finite);
    EXPECT_NE(std::string(e.what()).find("t1"), std::string::npos) << e.what();
  }
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Fixture s = make_fixture(1);
  SummarizerModel grads = s.model.zeros_like();
  grads.delta_bias(0, 0) = 3.0;
  grads.w_text(1, 2) = -0.01;
  AdamOptimizer opt(s.model, {0.05, 0.9, 0.999, 1e-8});
  SummarizerModel m = s.model;
  opt.step(m, grads);
  EXPECT_NEAR(m.delta_bias(0, 0), s.model.delta_bias(0, 0) - 0.05, 1e-9);
  EXPECT_NEAR(m.w_text(1, 2), s.model.w_text(1, 2) + 0.05, 1e-6);
  EXPECT_EQ(m.w_text(0, 0), s.model.w_text(0, 0));
  EXPECT_EQ(opt.steps_taken(), 1u);
}
