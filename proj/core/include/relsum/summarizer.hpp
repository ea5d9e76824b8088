#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "relsum/corpus.hpp"
#include "relsum/embedding.hpp"
#include "relsum/rng.hpp"

namespace relsum {

/// Which terms of the attention score are active. All-false is the plain
/// seq2seq ablation with uniform attention.
struct AttentionConfig {
  bool saliency = true;
  bool novelty = true;
  bool text_relevance = true;
  bool graph_relevance = true;

  static AttentionConfig all() { return {}; }
  static AttentionConfig none() { return {false, false, false, false}; }
  bool operator==(const AttentionConfig&) const = default;
};

struct NamedTensor {
  std::string name;
  Eigen::MatrixXd* value;
};

struct ConstNamedTensor {
  std::string name;
  const Eigen::MatrixXd* value;
};

inline constexpr std::string_view kUnknownToken = "<unk>";

/// Every trainable tensor of the extractor. Vectors are stored as one-column
/// matrices so that all tensors share one type for optimisers and
/// serialisation.
struct SummarizerModel {
  std::size_t dim = 0;
  std::vector<std::size_t> widths;
  std::vector<std::string> vocabulary;  // vocabulary[0] is kUnknownToken

  Eigen::MatrixXd word_embeddings;             // dim x |vocabulary|
  std::vector<Eigen::MatrixXd> kernels;        // per width q: dim x (q * dim)
  std::vector<Eigen::MatrixXd> kernel_biases;  // per width: dim x 1
  // LSTM gates stacked as [input; forget; cell; output].
  Eigen::MatrixXd lstm_input;      // 4dim x dim
  Eigen::MatrixXd lstm_recurrent;  // 4dim x dim
  Eigen::MatrixXd lstm_bias;       // 4dim x 1
  Eigen::MatrixXd w_saliency;      // dim x dim
  Eigen::MatrixXd w_novelty;
  Eigen::MatrixXd w_text;
  Eigen::MatrixXd w_graph;
  Eigen::MatrixXd delta_weights;  // 2dim x 1, applied to [h_j; context_j]
  Eigen::MatrixXd delta_bias;     // 1 x 1

  /// Uniform(-0.1, 0.1) everywhere except word vectors found in
  /// `word_init` (copied) and the forget-gate bias (1.0).
  static SummarizerModel initialize(std::size_t dim, std::vector<std::size_t> widths,
                                    std::vector<std::string> vocabulary, Rng& rng,
                                    const EmbeddingTable* word_init = nullptr);

  /// Same shapes, all zeros.
  SummarizerModel zeros_like() const;

  /// Fixed order: word_embeddings, kernel_q / kernel_bias_q per width,
  /// lstm_input, lstm_recurrent, lstm_bias, w_saliency, w_novelty, w_text,
  /// w_graph, delta_weights, delta_bias.
  std::vector<NamedTensor> tensors();
  std::vector<ConstNamedTensor> tensors() const;

  /// Index of a token, 0 when it is not in the vocabulary.
  int token_id(std::string_view token) const;
  void rebuild_index();

  bool operator==(const SummarizerModel& other) const;

 private:
  std::unordered_map<std::string, int> index_;
};

struct DocumentInput {
  std::string doc_id;
  std::vector<std::vector<int>> sentences;  // token ids
};

/// Everything the extractor reads for one target document.
struct SummarizerInput {
  std::vector<DocumentInput> references;  // candidate documents, sequence order
  DocumentInput target;                   // the target's own text
  Eigen::VectorXd target_node;            // graph embedding of the target
  std::vector<Eigen::VectorXd> reference_nodes;  // one per reference document

  std::size_t sentence_count() const;
};

/// Maps a candidate sequence to model inputs; missing node embeddings
/// become zero vectors.
SummarizerInput make_input(const SummarizerModel& model, const LabeledSequence& seq,
                           std::span<const Sentence> target_sentences, std::string_view target_id,
                           const EmbeddingTable* node_embeddings);

struct EncodedTarget {
  std::vector<Eigen::VectorXd> hidden;        // m hidden states
  Eigen::VectorXd target_text;                // mean hidden state of the target text
  Eigen::VectorXd target_node;
  std::vector<Eigen::VectorXd> source_nodes;  // node embedding of each sentence's document
  std::vector<bool> valid;
  std::vector<std::size_t> token_counts;

  std::size_t size() const { return hidden.size(); }
  /// Appends masked positions, as batching code pads short sequences.
  void pad(std::size_t extra);
};

/// Convolution trace of one sentence: per width, the tanh feature maps
/// (dim x (p - q + 1)) and the pooled maximum for each output channel.
struct CnnTrace {
  std::vector<Eigen::MatrixXd> feature_maps;
  std::vector<Eigen::VectorXd> pooled;
  Eigen::VectorXd embedding;  // mean of `pooled`
};

CnnTrace cnn_forward(const SummarizerModel& model, std::span<const int> token_ids);
Eigen::VectorXd encode_sentence_cnn(const SummarizerModel& model, std::span<const int> token_ids);
Eigen::VectorXd encode_sentence_cnn(const SummarizerModel& model, const Sentence& sentence);

/// Single-layer LSTM from a zero state over one document's sentences.
std::vector<Eigen::VectorXd> encode_document_lstm(const SummarizerModel& model,
                                                  std::span<const Eigen::VectorXd> sentence_embeddings);

EncodedTarget encode_target(const SummarizerModel& model, const SummarizerInput& input);

/// Raw attention scores of step j (masked positions are -infinity).
std::vector<double> attention_logits(const SummarizerModel& model, const AttentionConfig& cfg,
                                     const EncodedTarget& enc, std::size_t j,
                                     const Eigen::VectorXd& dynamic_output);
/// Softmax of attention_logits over the valid positions.
std::vector<double> attention_scores(const SummarizerModel& model, const AttentionConfig& cfg,
                                     const EncodedTarget& enc, std::size_t j,
                                     const Eigen::VectorXd& dynamic_output);

/// Pr(y_j = 1) for every position (0 at masked positions).
std::vector<double> decode_sequence(const SummarizerModel& model, const AttentionConfig& cfg,
                                    const EncodedTarget& enc);

inline constexpr double kProbabilityClamp = 1e-7;

/// Negative log-likelihood over valid positions with probabilities clamped
/// to [1e-7, 1 - 1e-7].
double sequence_loss(std::span<const double> probabilities, std::span<const int> labels,
                     const std::vector<bool>& valid);

/// Forward and reverse pass for one target. Gradients are added into
/// `grads`, which must have the model's shapes. Returns the loss.
double loss_and_gradients(const SummarizerModel& model, const AttentionConfig& cfg,
                          const SummarizerInput& input, std::span<const int> labels,
                          SummarizerModel& grads);

/// Forward pass only.
double forward_loss(const SummarizerModel& model, const AttentionConfig& cfg,
                    const SummarizerInput& input, std::span<const int> labels);

/// Indices visited in descending score order (lower index on ties) and
/// accepted while the running token count stays within the budget. The
/// result is sorted ascending. Shared by every extractive method.
std::vector<std::size_t> select_within_budget(std::span<const double> scores,
                                              std::span<const std::size_t> token_counts,
                                              const std::vector<bool>& valid,
                                              std::size_t word_budget);

std::vector<std::size_t> extract_summary(const SummarizerModel& model, const AttentionConfig& cfg,
                                         const EncodedTarget& enc, std::size_t word_budget);

}  // namespace relsum
