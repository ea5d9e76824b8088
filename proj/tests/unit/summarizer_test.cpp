#include <gtest/gtest.h>

#include <cmath>

#include "relsum/error.hpp"
#include "relsum/summarizer.hpp"

using namespace relsum;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<std::string> vocab(std::size_t n) {
  std::vector<std::string> v = {std::string(kUnknownToken)};
  for (std::size_t i = 1; i < n; ++i) v.push_back("w" + std::to_string(i));
  return v;
}

SummarizerModel zero_model(std::size_t dim, std::vector<std::size_t> widths, std::size_t v) {
  Rng rng(0);
  SummarizerModel m = SummarizerModel::initialize(dim, std::move(widths), vocab(v), rng);
  for (auto& t : m.tensors()) t.value->setZero();
  return m;
}

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

EncodedTarget encoded(std::vector<VectorXd> hidden, VectorXd text, VectorXd node, std::vector<VectorXd> sources) {
  EncodedTarget e;
  e.hidden = std::move(hidden);
  e.target_text = std::move(text);
  e.target_node = std::move(node);
  e.source_nodes = std::move(sources);
  e.valid.assign(e.hidden.size(), true);
  e.token_counts.assign(e.hidden.size(), 10);
  return e;
}

std::vector<double> softmax(std::vector<double> x) {
  double z = 0;
  for (double& v : x) z += (v = std::exp(v));
  for (double& v : x) v /= z;
  return x;
}

// A random d=8, m=5 instance: two references of three and two sentences.
struct GradInstance {
  SummarizerModel model;
  SummarizerInput input;
  std::vector<int> labels;
};

GradInstance grad_instance(std::uint64_t seed) {
  Rng rng(seed);
  GradInstance g;
  g.model = SummarizerModel::initialize(8, {2, 3}, vocab(12), rng);
  // Larger than the default scale so every term carries signal.
  for (auto& t : g.model.tensors())
    for (Eigen::Index k = 0; k < t.value->size(); ++k) t.value->data()[k] = rng.uniform(-0.6, 0.6);
  auto sentence = [&](std::size_t len) {
    std::vector<int> ids;
    for (std::size_t i = 0; i < len; ++i) ids.push_back(static_cast<int>(rng.below(12)));
    return ids;
  };
  g.input.references = {{"r1", {sentence(5), sentence(7), sentence(6)}}, {"r2", {sentence(4), sentence(8)}}};
  g.input.target = {"t", {sentence(6), sentence(5)}};
  auto random_vec = [&] {
    VectorXd v(8);
    for (int i = 0; i < 8; ++i) v(i) = rng.uniform(-1, 1);
    return v;
  };
  g.input.target_node = random_vec();
  g.input.reference_nodes = {random_vec(), random_vec()};
  g.labels = {1, 0, 0, 1, 0};
  return g;
}

}  // namespace

TEST(Cnn, FeatureMapCounts) {
  const SummarizerModel m = zero_model(4, {2, 3}, 5);
  const std::vector<int> ids = {1, 2, 3, 4, 1, 2};
  const CnnTrace t = cnn_forward(m, ids);
  ASSERT_EQ(t.feature_maps.size(), 2u);
  EXPECT_EQ(t.feature_maps[0].cols(), 5);
  EXPECT_EQ(t.feature_maps[1].cols(), 4);
  EXPECT_EQ(t.feature_maps[0].rows(), 4);
}

TEST(Cnn, ZeroParametersGiveZeroEmbedding) {
  Rng rng(1);
  SummarizerModel m = SummarizerModel::initialize(4, {3, 4, 5}, vocab(6), rng);
  for (auto& k : m.kernels) k.setZero();
  for (auto& b : m.kernel_biases) b.setZero();
  EXPECT_TRUE(encode_sentence_cnn(m, std::vector<int>{1, 2, 3, 4, 5, 1, 2}).isZero(0));
}

TEST(Cnn, HandComputedWidthOne) {
  SummarizerModel m = zero_model(2, {1}, 8);
  for (int k = 1; k <= 7; ++k) m.word_embeddings.col(k) = vec({0.1 * k, -0.1 * k});
  m.kernels[0] << 2, 0, 0, -1;
  m.kernel_biases[0] << 0.1, 0;
  const VectorXd e = encode_sentence_cnn(m, std::vector<int>{3, 7, 1, 5, 2, 6, 4});
  // Row 0 peaks at token 7: tanh(1.4 + 0.1); row 1 at token 7 too: tanh(0.7).
  EXPECT_NEAR(e(0), std::tanh(1.5), 1e-15);
  EXPECT_NEAR(e(1), std::tanh(0.7), 1e-15);
}

TEST(Cnn, UnknownTokensShareOneVector) {
  Rng rng(2);
  SummarizerModel m = SummarizerModel::initialize(4, {2}, vocab(4), rng);
  EXPECT_EQ(m.token_id("nope"), 0);
  EXPECT_EQ(m.token_id("zzz"), 0);
  EXPECT_EQ(m.token_id("w2"), 2);
  Sentence a{{"nope", "w1", "w2"}, "d", 0}, b{{"other", "w1", "w2"}, "d", 0};
  EXPECT_EQ(encode_sentence_cnn(m, a), encode_sentence_cnn(m, b));
}

TEST(Lstm, SingleStepClosedForm) {
  Rng rng(3);
  const SummarizerModel m = SummarizerModel::initialize(3, {2}, vocab(3), rng);
  const VectorXd x = vec({0.3, -0.2, 0.5});
  const auto h = encode_document_lstm(m, std::vector<VectorXd>{x});
  ASSERT_EQ(h.size(), 1u);
  const VectorXd z = m.lstm_input * x + m.lstm_bias.col(0);
  for (int r = 0; r < 3; ++r) {
    const double c = sig(z(r)) * std::tanh(z(6 + r));
    EXPECT_NEAR(h[0](r), sig(z(9 + r)) * std::tanh(c), 1e-15);
  }
  EXPECT_TRUE(encode_document_lstm(m, std::vector<VectorXd>{}).empty());
}

TEST(Lstm, OrderSensitive) {
  Rng rng(4);
  const SummarizerModel m = SummarizerModel::initialize(4, {2}, vocab(3), rng);
  std::vector<VectorXd> xs = {VectorXd::Random(4), VectorXd::Random(4), VectorXd::Random(4)};
  const auto a = encode_document_lstm(m, xs);
  std::swap(xs[0], xs[2]);
  const auto b = encode_document_lstm(m, xs);
  EXPECT_GT((a.back() - b.back()).norm(), 1e-6);
}

TEST(Lstm, ZeroGatesGiveZeroStates) {
  const SummarizerModel m = zero_model(3, {2}, 3);
  for (const auto& h : encode_document_lstm(m, std::vector<VectorXd>{vec({1, 2, 3}), vec({-1, 0, 4})}))
    EXPECT_TRUE(h.isZero(0));
}

TEST(Attention, ZeroMatricesOrNoTermsAreUniform) {
  Rng rng(5);
  SummarizerModel m = SummarizerModel::initialize(2, {1}, vocab(2), rng);
  EncodedTarget e = encoded({vec({1, 0}), vec({0, 1}), vec({1, 1})}, vec({1, 0}), vec({0, 1}),
                            {vec({1, 0}), vec({0, 1}), vec({0, 0})});
  e.pad(2);
  for (double w : attention_scores(m, AttentionConfig::none(), e, 1, vec({0.3, 0.2})))
    if (w > 0) EXPECT_NEAR(w, 1.0 / 3, 1e-15);
  m.w_saliency.setZero();
  m.w_novelty.setZero();
  m.w_text.setZero();
  m.w_graph.setZero();
  const auto s = attention_scores(m, AttentionConfig::all(), e, 1, vec({0.3, 0.2}));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(s[i], 1.0 / 3, 1e-15);
  EXPECT_EQ(s[3], 0.0);
  EXPECT_EQ(s[4], 0.0);
}

TEST(Attention, HandComputedScores) {
  SummarizerModel m = zero_model(2, {1}, 2);
  m.w_saliency.setIdentity();
  m.w_novelty.setIdentity();
  m.w_text.setIdentity();
  m.w_graph.setIdentity();
  const EncodedTarget e = encoded({vec({1, 0}), vec({0, 1}), vec({1, 1})}, vec({1, 0}), vec({0, 1}),
                                  {vec({1, 0}), vec({0, 1}), vec({0, 0})});
  // query = h_1 - d + text = (1.5, -0.5); graph term = node . source_i = (0, 1, 0).
  const auto logits = attention_logits(m, AttentionConfig::all(), e, 0, vec({0.5, 0.5}));
  EXPECT_NEAR(logits[0], 1.5, 1e-15);
  EXPECT_NEAR(logits[1], 0.5, 1e-15);
  EXPECT_NEAR(logits[2], 1.0, 1e-15);
  const auto want = softmax({1.5, 0.5, 1.0});
  const auto got = attention_scores(m, AttentionConfig::all(), e, 0, vec({0.5, 0.5}));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(got[i], want[i], 1e-15);
  EXPECT_THROW(attention_scores(m, AttentionConfig::all(), e, 3, vec({0, 0})), Error);
  EXPECT_THROW(attention_scores(m, AttentionConfig::all(), e, 0, vec({0, 0, 0})), Error);
}

TEST(Attention, WeightsFormDistribution) {
  const GradInstance g = grad_instance(6);
  EncodedTarget e = encode_target(g.model, g.input);
  e.pad(3);
  for (std::size_t j = 0; j < 5; ++j) {
    const auto w = attention_scores(g.model, AttentionConfig::all(), e, j, VectorXd::Random(8));
    double z = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      EXPECT_GE(w[i], 0.0);
      if (i >= 5) EXPECT_EQ(w[i], 0.0);
      z += w[i];
    }
    EXPECT_NEAR(z, 1.0, 1e-9);
  }
}

TEST(Decoder, ZeroDeltaGivesHalf) {
  GradInstance g = grad_instance(7);
  g.model.delta_weights.setZero();
  g.model.delta_bias.setZero();
  for (double p : decode_sequence(g.model, AttentionConfig::all(), encode_target(g.model, g.input)))
    EXPECT_EQ(p, 0.5);
}

TEST(Decoder, FirstStepSeesNoHistory) {
  // With only the novelty term active, step 1 attends uniformly whatever W_n is.
  GradInstance g = grad_instance(8);
  const AttentionConfig novelty_only{false, true, false, false};
  const EncodedTarget e = encode_target(g.model, g.input);
  const double p1 = decode_sequence(g.model, novelty_only, e)[0];
  g.model.w_novelty *= 5.0;
  EXPECT_EQ(decode_sequence(g.model, novelty_only, e)[0], p1);
}

TEST(Decoder, HandComputedTwoSteps) {
  SummarizerModel m = zero_model(2, {1}, 2);
  m.w_novelty.setIdentity();
  m.delta_weights.col(0) << 1, 2, 0.5, -1;
  m.delta_bias(0, 0) = 0.1;
  const EncodedTarget e = encoded({vec({1, 0}), vec({0, 1})}, vec({0, 0}), vec({0, 0}), {vec({0, 0}), vec({0, 0})});
  const AttentionConfig novelty_only{false, true, false, false};
  const auto p = decode_sequence(m, novelty_only, e);
  const double p1 = sig(1.0 + 0.5 * 0.5 - 1.0 * 0.5 + 0.1);
  const double a1 = std::exp(-p1) / (std::exp(-p1) + 1.0), a2 = 1.0 - a1;
  const double p2 = sig(2.0 + 0.5 * a1 - 1.0 * a2 + 0.1);
  EXPECT_NEAR(p[0], p1, 1e-15);
  EXPECT_NEAR(p[1], p2, 1e-15);
}

TEST(Loss, Examples) {
  const std::vector<bool> valid(4, true);
  EXPECT_NEAR(sequence_loss(std::vector<double>(4, 0.5), std::vector<int>{1, 0, 1, 0}, valid), 4 * std::log(2.0),
              1e-15);
  EXPECT_NEAR(sequence_loss(std::vector<double>{1, 0, 1, 0}, std::vector<int>{1, 0, 1, 0}, valid),
              -4 * std::log(1 - kProbabilityClamp), 1e-15);
  const std::vector<bool> masked = {true, false, true, false};
  const std::vector<double> p = {0.3, 0.9, 0.6, 0.1};
  EXPECT_EQ(sequence_loss(p, std::vector<int>{1, 0, 0, 1}, masked), sequence_loss(p, std::vector<int>{1, 1, 0, 0}, masked));
  EXPECT_THROW(sequence_loss(p, std::vector<int>{1}, masked), Error);
}

TEST(Gradients, MatchFiniteDifferencesEverywhere) {
  for (const AttentionConfig cfg : {AttentionConfig::all(), AttentionConfig{true, false, true, false}}) {
    const GradInstance g = grad_instance(9);
    SummarizerModel grads = g.model.zeros_like();
    loss_and_gradients(g.model, cfg, g.input, g.labels, grads);
    SummarizerModel probe = g.model;
    auto probe_tensors = probe.tensors();
    const auto grad_tensors = std::as_const(grads).tensors();
    const double h = 1e-5;
    for (std::size_t t = 0; t < probe_tensors.size(); ++t) {
      MatrixXd& value = *probe_tensors[t].value;
      const MatrixXd& analytic = *grad_tensors[t].value;
      double worst = 0;
      for (Eigen::Index k = 0; k < value.size(); ++k) {
        const double saved = value.data()[k];
        value.data()[k] = saved + h;
        const double up = forward_loss(probe, cfg, g.input, g.labels);
        value.data()[k] = saved - h;
        const double down = forward_loss(probe, cfg, g.input, g.labels);
        value.data()[k] = saved;
        const double numeric = (up - down) / (2 * h);
        const double a = analytic.data()[k];
        const double scale = std::max(std::abs(a), std::abs(numeric));
        const double err = scale > 1e-6 ? std::abs(a - numeric) / scale : std::abs(a - numeric);
        worst = std::max(worst, err);
      }
      EXPECT_LT(worst, 1e-4) << probe_tensors[t].name;
    }
  }
}

TEST(Gradients, AccumulateIntoBuffer) {
  const GradInstance g = grad_instance(10);
  SummarizerModel once = g.model.zeros_like(), twice = g.model.zeros_like();
  const double l1 = loss_and_gradients(g.model, AttentionConfig::all(), g.input, g.labels, once);
  loss_and_gradients(g.model, AttentionConfig::all(), g.input, g.labels, twice);
  const double l2 = loss_and_gradients(g.model, AttentionConfig::all(), g.input, g.labels, twice);
  EXPECT_EQ(l1, l2);
  EXPECT_EQ(l1, forward_loss(g.model, AttentionConfig::all(), g.input, g.labels));
  EXPECT_TRUE((twice.delta_weights - 2 * once.delta_weights).isZero(1e-12));
}

TEST(Decoder, NoTermsIgnoresAttentionMatrices) {
  GradInstance g = grad_instance(11);
  const EncodedTarget e = encode_target(g.model, g.input);
  const auto before = decode_sequence(g.model, AttentionConfig::none(), e);
  g.model.w_saliency.setRandom();
  g.model.w_novelty.setRandom();
  g.model.w_text.setRandom();
  g.model.w_graph.setRandom();
  EXPECT_EQ(decode_sequence(g.model, AttentionConfig::none(), e), before);
  SummarizerModel grads = g.model.zeros_like();
  loss_and_gradients(g.model, AttentionConfig::none(), g.input, g.labels, grads);
  EXPECT_TRUE(grads.w_saliency.isZero(0));
  EXPECT_TRUE(grads.w_graph.isZero(0));
}

TEST(Selection, Examples) {
  const std::vector<bool> v3(3, true);
  EXPECT_EQ(select_within_budget(std::vector<double>{0.9, 0.2, 0.8}, std::vector<std::size_t>{10, 10, 10}, v3, 25),
            (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(select_within_budget(std::vector<double>{0.5, 0.5, 0.5}, std::vector<std::size_t>{10, 10, 10}, v3, 20),
            (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(select_within_budget(std::vector<double>{0.1, 0.7, 0.3}, std::vector<std::size_t>{10, 10, 10}, v3, 500),
            (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_TRUE(
      select_within_budget(std::vector<double>{0.1, 0.7}, std::vector<std::size_t>{10, 10}, {true, true}, 5).empty());
  EXPECT_EQ(select_within_budget(std::vector<double>{0.1, 0.7, 0.9}, std::vector<std::size_t>{10, 10, 10},
                                 {true, true, false}, 500),
            (std::vector<std::size_t>{0, 1}));
}

TEST(Selection, PaddingDoesNotChangeSummary) {
  const GradInstance g = grad_instance(12);
  EncodedTarget e = encode_target(g.model, g.input);
  const auto a = extract_summary(g.model, AttentionConfig::all(), e, 14);
  const auto probs = decode_sequence(g.model, AttentionConfig::all(), e);
  e.pad(4);
  EXPECT_EQ(extract_summary(g.model, AttentionConfig::all(), e, 14), a);
  const auto padded = decode_sequence(g.model, AttentionConfig::all(), e);
  for (std::size_t i = 0; i < probs.size(); ++i) EXPECT_EQ(padded[i], probs[i]);
  for (std::size_t i = probs.size(); i < padded.size(); ++i) EXPECT_EQ(padded[i], 0.0);
}

TEST(Model, InitializationAndInputs) {
  Rng rng(13);
  EmbeddingTable words(4);
  words.set("w2", {1, 2, 3, 4});
  const SummarizerModel m = SummarizerModel::initialize(4, {3, 4, 5}, {"w1", "w2"}, rng, &words);
  ASSERT_EQ(m.vocabulary.size(), 3u);
  EXPECT_EQ(m.vocabulary[0], kUnknownToken);
  EXPECT_EQ(m.word_embeddings.col(m.token_id("w2")), vec({1, 2, 3, 4}));
  EXPECT_EQ(m.lstm_bias.block(4, 0, 4, 1), MatrixXd::Ones(4, 1));
  EXPECT_LE(m.w_graph.cwiseAbs().maxCoeff(), 0.1);
  EXPECT_EQ(m.tensors().size(), 16u);
  EXPECT_EQ(m.tensors()[1].name, "kernel_3");

  LabeledSequence seq;
  seq.sentences = {{{"w1", "w2", "w1"}, "r", 0}, {{"w2", "zz", "w1"}, "r", 1}, {{"w1", "w1", "w1"}, "s", 0}};
  seq.boundaries = {{"r", 0, 2}, {"s", 2, 3}};
  EmbeddingTable nodes(4);
  nodes.set("paper:r", {1, 1, 1, 1});
  const std::vector<Sentence> target = {{{"w2", "w2", "w2"}, "t", 0}};
  const SummarizerInput in = make_input(m, seq, target, "t", &nodes);
  ASSERT_EQ(in.references.size(), 2u);
  EXPECT_EQ(in.references[0].sentences[1], (std::vector<int>{2, 0, 1}));
  EXPECT_EQ(in.reference_nodes[0], vec({1, 1, 1, 1}));
  EXPECT_TRUE(in.reference_nodes[1].isZero(0));
  EXPECT_TRUE(in.target_node.isZero(0));
  EXPECT_EQ(in.sentence_count(), 3u);
}
