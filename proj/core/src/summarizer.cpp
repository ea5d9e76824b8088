#include "relsum/summarizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>
#include <limits>
#include <numeric>

#include "relsum/error.hpp"
#include "relsum/hetero_graph.hpp"

namespace relsum {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

VectorXd sigmoid(const VectorXd& x) {
  VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = sigmoid(x[i]);
  return out;
}

void fill_uniform(MatrixXd& m, Rng& rng, double scale) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-scale, scale);
}

void require_dim(const VectorXd& v, std::size_t dim, const char* what) {
  if (static_cast<std::size_t>(v.size()) != dim)
    throw Error(ErrorCategory::dimension_mismatch,
                std::string(what) + " has length " + std::to_string(v.size()) + ", expected " +
                    std::to_string(dim));
}

// ---- forward caches ----

struct CnnCache {
  std::vector<int> ids;
  std::vector<MatrixXd> windows;  // per width: (q d) x maps
  std::vector<MatrixXd> acts;     // per width: d x maps
  std::vector<std::vector<Eigen::Index>> argmax;
  VectorXd embedding;
};

struct LstmCache {
  std::vector<VectorXd> x, i, f, g, o, c, h;
};

struct DocCache {
  std::vector<CnnCache> sentences;
  LstmCache lstm;
};

CnnCache cnn_cached(const SummarizerModel& model, std::span<const int> ids) {
  const auto d = static_cast<Eigen::Index>(model.dim);
  const auto p = static_cast<Eigen::Index>(ids.size());
  CnnCache cache;
  cache.ids.assign(ids.begin(), ids.end());
  cache.embedding = VectorXd::Zero(d);
  for (std::size_t w = 0; w < model.widths.size(); ++w) {
    const auto q = static_cast<Eigen::Index>(model.widths[w]);
    const Eigen::Index maps = p >= q ? p - q + 1 : 0;
    MatrixXd windows(q * d, maps);
    for (Eigen::Index i = 0; i < maps; ++i)
      for (Eigen::Index k = 0; k < q; ++k)
        windows.col(i).segment(k * d, d) = model.word_embeddings.col(ids[static_cast<std::size_t>(i + k)]);
    MatrixXd acts = model.kernels[w] * windows;
    acts.colwise() += model.kernel_biases[w].col(0);
    acts = acts.array().tanh().matrix();
    std::vector<Eigen::Index> argmax(static_cast<std::size_t>(d), 0);
    VectorXd pooled = VectorXd::Zero(d);
    if (maps > 0) {
      for (Eigen::Index r = 0; r < d; ++r) {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < maps; ++i)
          if (acts(r, i) > acts(r, best)) best = i;
        argmax[static_cast<std::size_t>(r)] = best;
        pooled[r] = acts(r, best);
      }
    }
    cache.embedding += pooled;
    cache.windows.push_back(std::move(windows));
    cache.acts.push_back(std::move(acts));
    cache.argmax.push_back(std::move(argmax));
  }
  if (!model.widths.empty()) cache.embedding /= static_cast<double>(model.widths.size());
  return cache;
}

void cnn_backward(const SummarizerModel& model, const CnnCache& cache, const VectorXd& grad,
                  SummarizerModel& grads) {
  const auto d = static_cast<Eigen::Index>(model.dim);
  const double share = 1.0 / static_cast<double>(model.widths.size());
  for (std::size_t w = 0; w < model.widths.size(); ++w) {
    const MatrixXd& acts = cache.acts[w];
    if (acts.cols() == 0) continue;
    const auto q = static_cast<Eigen::Index>(model.widths[w]);
    for (Eigen::Index r = 0; r < d; ++r) {
      const Eigen::Index i = cache.argmax[w][static_cast<std::size_t>(r)];
      const double a = acts(r, i);
      const double dz = grad[r] * share * (1.0 - a * a);
      if (dz == 0.0) continue;
      grads.kernels[w].row(r) += dz * cache.windows[w].col(i).transpose();
      grads.kernel_biases[w](r, 0) += dz;
      const VectorXd dx = dz * model.kernels[w].row(r).transpose();
      for (Eigen::Index k = 0; k < q; ++k)
        grads.word_embeddings.col(cache.ids[static_cast<std::size_t>(i + k)]) += dx.segment(k * d, d);
    }
  }
}

LstmCache lstm_cached(const SummarizerModel& model, std::span<const VectorXd> inputs) {
  const auto d = static_cast<Eigen::Index>(model.dim);
  LstmCache cache;
  VectorXd h = VectorXd::Zero(d);
  VectorXd c = VectorXd::Zero(d);
  for (const VectorXd& x : inputs) {
    require_dim(x, model.dim, "sentence embedding");
    const VectorXd z = model.lstm_input * x + model.lstm_recurrent * h + model.lstm_bias.col(0);
    VectorXd ig = sigmoid(VectorXd(z.segment(0, d)));
    VectorXd fg = sigmoid(VectorXd(z.segment(d, d)));
    VectorXd gg = z.segment(2 * d, d).array().tanh().matrix();
    VectorXd og = sigmoid(VectorXd(z.segment(3 * d, d)));
    c = (fg.array() * c.array() + ig.array() * gg.array()).matrix();
    h = (og.array() * c.array().tanh()).matrix();
    cache.x.push_back(x);
    cache.i.push_back(std::move(ig));
    cache.f.push_back(std::move(fg));
    cache.g.push_back(std::move(gg));
    cache.o.push_back(std::move(og));
    cache.c.push_back(c);
    cache.h.push_back(h);
  }
  return cache;
}

// Returns the gradient with respect to each input.
std::vector<VectorXd> lstm_backward(const SummarizerModel& model, const LstmCache& cache,
                                    std::span<const VectorXd> grad_h, SummarizerModel& grads) {
  const auto d = static_cast<Eigen::Index>(model.dim);
  const std::size_t steps = cache.h.size();
  std::vector<VectorXd> grad_x(steps);
  VectorXd dh_next = VectorXd::Zero(d);
  VectorXd dc_next = VectorXd::Zero(d);
  for (std::size_t s = steps; s-- > 0;) {
    const VectorXd dh = grad_h[s] + dh_next;
    const VectorXd c_prev = s > 0 ? cache.c[s - 1] : VectorXd::Zero(d);
    const VectorXd h_prev = s > 0 ? cache.h[s - 1] : VectorXd::Zero(d);
    const Eigen::ArrayXd tc = cache.c[s].array().tanh();
    const Eigen::ArrayXd& ig = cache.i[s].array();
    const Eigen::ArrayXd& fg = cache.f[s].array();
    const Eigen::ArrayXd& gg = cache.g[s].array();
    const Eigen::ArrayXd& og = cache.o[s].array();
    const Eigen::ArrayXd dc = dh.array() * og * (1.0 - tc * tc) + dc_next.array();
    VectorXd dz(4 * d);
    dz.segment(0, d) = (dc * gg * ig * (1.0 - ig)).matrix();
    dz.segment(d, d) = (dc * c_prev.array() * fg * (1.0 - fg)).matrix();
    dz.segment(2 * d, d) = (dc * ig * (1.0 - gg * gg)).matrix();
    dz.segment(3 * d, d) = (dh.array() * tc * og * (1.0 - og)).matrix();
    dc_next = (dc * fg).matrix();
    grads.lstm_input += dz * cache.x[s].transpose();
    grads.lstm_recurrent += dz * h_prev.transpose();
    grads.lstm_bias.col(0) += dz;
    grad_x[s] = model.lstm_input.transpose() * dz;
    dh_next = model.lstm_recurrent.transpose() * dz;
  }
  return grad_x;
}

DocCache encode_doc_cached(const SummarizerModel& model, const DocumentInput& doc) {
  DocCache cache;
  std::vector<VectorXd> embeddings;
  for (const auto& ids : doc.sentences) {
    cache.sentences.push_back(cnn_cached(model, ids));
    embeddings.push_back(cache.sentences.back().embedding);
  }
  cache.lstm = lstm_cached(model, embeddings);
  return cache;
}

struct EncodeCache {
  std::vector<DocCache> references;
  DocCache target;
};

EncodedTarget encode_cached(const SummarizerModel& model, const SummarizerInput& input,
                            EncodeCache* cache) {
  if (input.reference_nodes.size() != input.references.size())
    throw Error(ErrorCategory::dimension_mismatch, "one node embedding per reference required");
  require_dim(input.target_node, model.dim, "target node embedding");
  EncodedTarget enc;
  for (std::size_t r = 0; r < input.references.size(); ++r) {
    require_dim(input.reference_nodes[r], model.dim, "reference node embedding");
    DocCache doc = encode_doc_cached(model, input.references[r]);
    for (std::size_t s = 0; s < doc.lstm.h.size(); ++s) {
      enc.hidden.push_back(doc.lstm.h[s]);
      enc.source_nodes.push_back(input.reference_nodes[r]);
      enc.valid.push_back(true);
      enc.token_counts.push_back(input.references[r].sentences[s].size());
    }
    if (cache) cache->references.push_back(std::move(doc));
  }
  DocCache target = encode_doc_cached(model, input.target);
  enc.target_text = VectorXd::Zero(static_cast<Eigen::Index>(model.dim));
  for (const VectorXd& h : target.lstm.h) enc.target_text += h;
  if (!target.lstm.h.empty()) enc.target_text /= static_cast<double>(target.lstm.h.size());
  enc.target_node = input.target_node;
  if (cache) cache->target = std::move(target);
  return enc;
}

// ---- decoder ----

struct StepCache {
  VectorXd dynamic;  // d_j
  VectorXd query;    // attention query vector of step j
  std::vector<double> weights;
  VectorXd context;
  double probability = 0.0;
};

struct DecodeCache {
  std::vector<StepCache> steps;
  std::vector<double> graph_terms;
};

std::vector<double> graph_terms(const SummarizerModel& model, const AttentionConfig& cfg,
                                const EncodedTarget& enc) {
  std::vector<double> out(enc.size(), 0.0);
  if (!cfg.graph_relevance) return out;
  const VectorXd projected = model.w_graph.transpose() * enc.target_node;
  for (std::size_t i = 0; i < enc.size(); ++i)
    if (enc.valid[i]) out[i] = projected.dot(enc.source_nodes[i]);
  return out;
}

VectorXd attention_query(const SummarizerModel& model, const AttentionConfig& cfg,
                         const EncodedTarget& enc, std::size_t j, const VectorXd& dynamic) {
  VectorXd q = VectorXd::Zero(static_cast<Eigen::Index>(model.dim));
  if (cfg.saliency) q += model.w_saliency.transpose() * enc.hidden[j];
  if (cfg.novelty) q -= model.w_novelty.transpose() * dynamic;
  if (cfg.text_relevance) q += model.w_text.transpose() * enc.target_text;
  return q;
}

std::vector<double> logits_from(const EncodedTarget& enc, const VectorXd& query,
                                std::span<const double> graph, bool any_text_term) {
  std::vector<double> out(enc.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < enc.size(); ++i) {
    if (!enc.valid[i]) continue;
    out[i] = (any_text_term ? query.dot(enc.hidden[i]) : 0.0) + graph[i];
  }
  return out;
}

std::vector<double> softmax_valid(std::span<const double> logits, const std::vector<bool>& valid) {
  std::vector<double> out(logits.size(), 0.0);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (valid[i]) top = std::max(top, logits[i]);
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!valid[i]) continue;
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (double& w : out) w /= total;
  return out;
}

bool any_text_term(const AttentionConfig& cfg) {
  return cfg.saliency || cfg.novelty || cfg.text_relevance;
}

void check_encoded(const SummarizerModel& model, const EncodedTarget& enc) {
  const std::size_t m = enc.size();
  if (enc.valid.size() != m || enc.source_nodes.size() != m || enc.token_counts.size() != m)
    throw Error(ErrorCategory::dimension_mismatch, "encoded target fields have unequal lengths");
  require_dim(enc.target_text, model.dim, "target text embedding");
  require_dim(enc.target_node, model.dim, "target node embedding");
  for (std::size_t i = 0; i < m; ++i) {
    require_dim(enc.hidden[i], model.dim, "hidden state");
    require_dim(enc.source_nodes[i], model.dim, "source node embedding");
  }
}

DecodeCache decode_cached(const SummarizerModel& model, const AttentionConfig& cfg,
                          const EncodedTarget& enc) {
  check_encoded(model, enc);
  const auto d = static_cast<Eigen::Index>(model.dim);
  DecodeCache cache;
  cache.graph_terms = graph_terms(model, cfg, enc);
  cache.steps.resize(enc.size());
  const bool text = any_text_term(cfg);
  const double bias = model.delta_bias(0, 0);
  const auto w_own = model.delta_weights.col(0).head(d);
  const auto w_ctx = model.delta_weights.col(0).tail(d);
  VectorXd dynamic = VectorXd::Zero(d);
  for (std::size_t j = 0; j < enc.size(); ++j) {
    StepCache& step = cache.steps[j];
    if (!enc.valid[j]) continue;
    step.dynamic = dynamic;
    step.query = attention_query(model, cfg, enc, j, dynamic);
    step.weights = softmax_valid(logits_from(enc, step.query, cache.graph_terms, text), enc.valid);
    step.context = VectorXd::Zero(d);
    for (std::size_t i = 0; i < enc.size(); ++i)
      if (enc.valid[i]) step.context += step.weights[i] * enc.hidden[i];
    step.probability = sigmoid(w_own.dot(enc.hidden[j]) + w_ctx.dot(step.context) + bias);
    dynamic += step.probability * enc.hidden[j];
  }
  return cache;
}

// d loss / d p for one position under the clamped likelihood.
double loss_gradient(double p, int label) {
  if (p <= kProbabilityClamp || p >= 1.0 - kProbabilityClamp) return 0.0;
  return label ? -1.0 / p : 1.0 / (1.0 - p);
}

// Reverse pass through the decoder. Fills grad_hidden and grad_target_text,
// and adds parameter gradients into grads.
void decode_backward(const SummarizerModel& model, const AttentionConfig& cfg,
                     const EncodedTarget& enc, const DecodeCache& cache, std::span<const int> labels,
                     std::vector<VectorXd>& grad_hidden, VectorXd& grad_target_text,
                     SummarizerModel& grads) {
  const auto d = static_cast<Eigen::Index>(model.dim);
  const std::size_t m = enc.size();
  grad_hidden.assign(m, VectorXd::Zero(d));
  grad_target_text = VectorXd::Zero(d);
  const auto w_own = model.delta_weights.col(0).head(d);
  const auto w_ctx = model.delta_weights.col(0).tail(d);
  const bool text = any_text_term(cfg);
  VectorXd later = VectorXd::Zero(d);  // sum over k > j of dL/dd_k
  for (std::size_t j = m; j-- > 0;) {
    if (!enc.valid[j]) continue;
    const StepCache& step = cache.steps[j];
    const VectorXd& hj = enc.hidden[j];
    const double p = step.probability;
    const double dp = loss_gradient(p, labels[j]) + hj.dot(later);
    grad_hidden[j] += p * later;
    const double dlogit = dp * p * (1.0 - p);
    grads.delta_weights.col(0).head(d) += dlogit * hj;
    grads.delta_weights.col(0).tail(d) += dlogit * step.context;
    grads.delta_bias(0, 0) += dlogit;
    grad_hidden[j] += dlogit * w_own;
    const VectorXd dctx = dlogit * w_ctx;

    std::vector<double> dweight(m, 0.0);
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!enc.valid[i]) continue;
      grad_hidden[i] += step.weights[i] * dctx;
      dweight[i] = dctx.dot(enc.hidden[i]);
      mean += step.weights[i] * dweight[i];
    }
    VectorXd v = VectorXd::Zero(d);
    VectorXd node_sum = VectorXd::Zero(d);
    for (std::size_t i = 0; i < m; ++i) {
      if (!enc.valid[i]) continue;
      const double draw = step.weights[i] * (dweight[i] - mean);
      if (text) {
        v += draw * enc.hidden[i];
        grad_hidden[i] += draw * step.query;
      }
      if (cfg.graph_relevance) node_sum += draw * enc.source_nodes[i];
    }
    VectorXd ddynamic = VectorXd::Zero(d);
    if (cfg.saliency) {
      grads.w_saliency += hj * v.transpose();
      grad_hidden[j] += model.w_saliency * v;
    }
    if (cfg.novelty) {
      grads.w_novelty -= step.dynamic * v.transpose();
      ddynamic = -(model.w_novelty * v);
    }
    if (cfg.text_relevance) {
      grads.w_text += enc.target_text * v.transpose();
      grad_target_text += model.w_text * v;
    }
    if (cfg.graph_relevance) grads.w_graph += enc.target_node * node_sum.transpose();
    later += ddynamic;
  }
}

void encoder_backward(const SummarizerModel& model, const SummarizerInput& input,
                      const EncodeCache& cache, std::span<const VectorXd> grad_hidden,
                      const VectorXd& grad_target_text, SummarizerModel& grads) {
  std::size_t offset = 0;
  auto backprop_doc = [&](const DocCache& doc, std::span<const VectorXd> grad_h) {
    const std::vector<VectorXd> grad_x = lstm_backward(model, doc.lstm, grad_h, grads);
    for (std::size_t s = 0; s < doc.sentences.size(); ++s)
      cnn_backward(model, doc.sentences[s], grad_x[s], grads);
  };
  for (const DocCache& doc : cache.references) {
    const std::size_t n = doc.lstm.h.size();
    backprop_doc(doc, grad_hidden.subspan(offset, n));
    offset += n;
  }
  const std::size_t n_target = cache.target.lstm.h.size();
  if (n_target > 0) {
    const VectorXd share = grad_target_text / static_cast<double>(n_target);
    const std::vector<VectorXd> grad_h(n_target, share);
    backprop_doc(cache.target, grad_h);
  }
  (void)input;
}

void check_labels(const EncodedTarget& enc, std::span<const int> labels) {
  if (labels.size() != enc.size())
    throw Error(ErrorCategory::dimension_mismatch,
                "expected " + std::to_string(enc.size()) + " labels, got " +
                    std::to_string(labels.size()));
}

std::vector<double> probabilities_of(const DecodeCache& cache) {
  std::vector<double> out;
  out.reserve(cache.steps.size());
  for (const StepCache& s : cache.steps) out.push_back(s.probability);
  return out;
}

}  // namespace

// ---- model ----

SummarizerModel SummarizerModel::initialize(std::size_t dim, std::vector<std::size_t> widths,
                                            std::vector<std::string> vocabulary, Rng& rng,
                                            const EmbeddingTable* word_init) {
  if (dim == 0) throw Error(ErrorCategory::invalid_argument, "model dimension must be positive");
  if (widths.empty()) throw Error(ErrorCategory::invalid_argument, "at least one kernel width required");
  for (std::size_t q : widths)
    if (q == 0) throw Error(ErrorCategory::invalid_argument, "kernel width must be positive");
  if (word_init && word_init->dim() != dim)
    throw Error(ErrorCategory::dimension_mismatch, "word embedding table dimension differs from model");
  if (vocabulary.empty() || vocabulary.front() != kUnknownToken)
    vocabulary.insert(vocabulary.begin(), std::string(kUnknownToken));

  constexpr double kScale = 0.1;
  const auto d = static_cast<Eigen::Index>(dim);
  SummarizerModel m;
  m.dim = dim;
  m.widths = std::move(widths);
  m.vocabulary = std::move(vocabulary);
  m.word_embeddings.resize(d, static_cast<Eigen::Index>(m.vocabulary.size()));
  fill_uniform(m.word_embeddings, rng, kScale);
  if (word_init) {
    for (std::size_t w = 0; w < m.vocabulary.size(); ++w) {
      if (!word_init->contains(m.vocabulary[w])) continue;
      const auto vec = word_init->at(m.vocabulary[w]);
      for (Eigen::Index r = 0; r < d; ++r) m.word_embeddings(r, static_cast<Eigen::Index>(w)) = vec[static_cast<std::size_t>(r)];
    }
  }
  for (std::size_t q : m.widths) {
    MatrixXd kernel(d, static_cast<Eigen::Index>(q) * d);
    fill_uniform(kernel, rng, kScale);
    MatrixXd bias(d, 1);
    fill_uniform(bias, rng, kScale);
    m.kernels.push_back(std::move(kernel));
    m.kernel_biases.push_back(std::move(bias));
  }
  m.lstm_input.resize(4 * d, d);
  m.lstm_recurrent.resize(4 * d, d);
  m.lstm_bias.resize(4 * d, 1);
  fill_uniform(m.lstm_input, rng, kScale);
  fill_uniform(m.lstm_recurrent, rng, kScale);
  fill_uniform(m.lstm_bias, rng, kScale);
  m.lstm_bias.block(d, 0, d, 1).setConstant(1.0);
  for (MatrixXd* w : {&m.w_saliency, &m.w_novelty, &m.w_text, &m.w_graph}) {
    w->resize(d, d);
    fill_uniform(*w, rng, kScale);
  }
  m.delta_weights.resize(2 * d, 1);
  fill_uniform(m.delta_weights, rng, kScale);
  m.delta_bias.resize(1, 1);
  fill_uniform(m.delta_bias, rng, kScale);
  m.rebuild_index();
  return m;
}

SummarizerModel SummarizerModel::zeros_like() const {
  SummarizerModel z = *this;
  for (auto& t : z.tensors()) t.value->setZero();
  return z;
}

std::vector<NamedTensor> SummarizerModel::tensors() {
  std::vector<NamedTensor> out;
  out.push_back({"word_embeddings", &word_embeddings});
  for (std::size_t w = 0; w < widths.size(); ++w) {
    const std::string q = std::to_string(widths[w]);
    out.push_back({"kernel_" + q, &kernels[w]});
    out.push_back({"kernel_bias_" + q, &kernel_biases[w]});
  }
  out.push_back({"lstm_input", &lstm_input});
  out.push_back({"lstm_recurrent", &lstm_recurrent});
  out.push_back({"lstm_bias", &lstm_bias});
  out.push_back({"w_saliency", &w_saliency});
  out.push_back({"w_novelty", &w_novelty});
  out.push_back({"w_text", &w_text});
  out.push_back({"w_graph", &w_graph});
  out.push_back({"delta_weights", &delta_weights});
  out.push_back({"delta_bias", &delta_bias});
  return out;
}

std::vector<ConstNamedTensor> SummarizerModel::tensors() const {
  std::vector<ConstNamedTensor> out;
  for (const auto& t : const_cast<SummarizerModel*>(this)->tensors()) out.push_back({t.name, t.value});
  return out;
}

int SummarizerModel::token_id(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? 0 : it->second;
}

void SummarizerModel::rebuild_index() {
  index_.clear();
  for (std::size_t i = 0; i < vocabulary.size(); ++i) index_.emplace(vocabulary[i], static_cast<int>(i));
}

bool SummarizerModel::operator==(const SummarizerModel& other) const {
  if (dim != other.dim || widths != other.widths || vocabulary != other.vocabulary) return false;
  const auto a = tensors();
  const auto b = other.tensors();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const MatrixXd& x = *a[i].value;
    const MatrixXd& y = *b[i].value;
    if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
    if (std::memcmp(x.data(), y.data(), sizeof(double) * static_cast<std::size_t>(x.size())) != 0) return false;
  }
  return true;
}

// ---- inputs ----

std::size_t SummarizerInput::sentence_count() const {
  std::size_t n = 0;
  for (const auto& r : references) n += r.sentences.size();
  return n;
}

SummarizerInput make_input(const SummarizerModel& model, const LabeledSequence& seq,
                           std::span<const Sentence> target_sentences, std::string_view target_id,
                           const EmbeddingTable* node_embeddings) {
  const auto d = static_cast<Eigen::Index>(model.dim);
  auto node_vector = [&](const std::string& paper_id) -> VectorXd {
    if (!node_embeddings) return VectorXd::Zero(d);
    const std::string label = NodeId::paper(paper_id).label();
    if (!node_embeddings->contains(label)) return VectorXd::Zero(d);
    VectorXd v = node_embeddings->vector(label);
    require_dim(v, model.dim, "node embedding");
    return v;
  };
  auto encode_tokens = [&](const Tokens& tokens) {
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(model.token_id(t));
    return ids;
  };
  SummarizerInput input;
  for (const DocumentSpan& span : seq.boundaries) {
    DocumentInput doc;
    doc.doc_id = span.paper_id;
    for (std::size_t i = span.begin; i < span.end; ++i)
      doc.sentences.push_back(encode_tokens(seq.sentences[i].tokens));
    input.references.push_back(std::move(doc));
    input.reference_nodes.push_back(node_vector(span.paper_id));
  }
  input.target.doc_id = std::string(target_id);
  for (const Sentence& s : target_sentences) input.target.sentences.push_back(encode_tokens(s.tokens));
  input.target_node = node_vector(std::string(target_id));
  return input;
}

void EncodedTarget::pad(std::size_t extra) {
  const Eigen::Index d = target_text.size();
  for (std::size_t k = 0; k < extra; ++k) {
    hidden.push_back(VectorXd::Zero(d));
    source_nodes.push_back(VectorXd::Zero(d));
    valid.push_back(false);
    token_counts.push_back(0);
  }
}

// ---- encoders ----

CnnTrace cnn_forward(const SummarizerModel& model, std::span<const int> token_ids) {
  const CnnCache cache = cnn_cached(model, token_ids);
  CnnTrace trace;
  trace.feature_maps = cache.acts;
  for (std::size_t w = 0; w < cache.acts.size(); ++w) {
    VectorXd pooled = VectorXd::Zero(static_cast<Eigen::Index>(model.dim));
    if (cache.acts[w].cols() > 0)
      for (Eigen::Index r = 0; r < pooled.size(); ++r)
        pooled[r] = cache.acts[w](r, cache.argmax[w][static_cast<std::size_t>(r)]);
    trace.pooled.push_back(std::move(pooled));
  }
  trace.embedding = cache.embedding;
  return trace;
}

VectorXd encode_sentence_cnn(const SummarizerModel& model, std::span<const int> token_ids) {
  return cnn_cached(model, token_ids).embedding;
}

VectorXd encode_sentence_cnn(const SummarizerModel& model, const Sentence& sentence) {
  std::vector<int> ids;
  for (const auto& t : sentence.tokens) ids.push_back(model.token_id(t));
  return encode_sentence_cnn(model, ids);
}

std::vector<VectorXd> encode_document_lstm(const SummarizerModel& model,
                                           std::span<const VectorXd> sentence_embeddings) {
  return lstm_cached(model, sentence_embeddings).h;
}

EncodedTarget encode_target(const SummarizerModel& model, const SummarizerInput& input) {
  return encode_cached(model, input, nullptr);
}

// ---- decoder ----

std::vector<double> attention_logits(const SummarizerModel& model, const AttentionConfig& cfg,
                                     const EncodedTarget& enc, std::size_t j,
                                     const VectorXd& dynamic_output) {
  check_encoded(model, enc);
  if (j >= enc.size() || !enc.valid[j])
    throw Error(ErrorCategory::invalid_argument, "attention step must be a valid position");
  require_dim(dynamic_output, model.dim, "dynamic output");
  const std::vector<double> graph = graph_terms(model, cfg, enc);
  return logits_from(enc, attention_query(model, cfg, enc, j, dynamic_output), graph,
                     any_text_term(cfg));
}

std::vector<double> attention_scores(const SummarizerModel& model, const AttentionConfig& cfg,
                                     const EncodedTarget& enc, std::size_t j,
                                     const VectorXd& dynamic_output) {
  return softmax_valid(attention_logits(model, cfg, enc, j, dynamic_output), enc.valid);
}

std::vector<double> decode_sequence(const SummarizerModel& model, const AttentionConfig& cfg,
                                    const EncodedTarget& enc) {
  return probabilities_of(decode_cached(model, cfg, enc));
}

double sequence_loss(std::span<const double> probabilities, std::span<const int> labels,
                     const std::vector<bool>& valid) {
  if (probabilities.size() != labels.size() || labels.size() != valid.size())
    throw Error(ErrorCategory::dimension_mismatch, "loss inputs must be parallel");
  double total = 0.0;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (!valid[j]) continue;
    const double p = std::clamp(probabilities[j], kProbabilityClamp, 1.0 - kProbabilityClamp);
    total -= labels[j] ? std::log(p) : std::log(1.0 - p);
  }
  return total;
}

double forward_loss(const SummarizerModel& model, const AttentionConfig& cfg,
                    const SummarizerInput& input, std::span<const int> labels) {
  const EncodedTarget enc = encode_target(model, input);
  check_labels(enc, labels);
  return sequence_loss(decode_sequence(model, cfg, enc), labels, enc.valid);
}

double loss_and_gradients(const SummarizerModel& model, const AttentionConfig& cfg,
                          const SummarizerInput& input, std::span<const int> labels,
                          SummarizerModel& grads) {
  EncodeCache enc_cache;
  const EncodedTarget enc = encode_cached(model, input, &enc_cache);
  check_labels(enc, labels);
  const DecodeCache dec = decode_cached(model, cfg, enc);
  const double loss = sequence_loss(probabilities_of(dec), labels, enc.valid);
  std::vector<VectorXd> grad_hidden;
  VectorXd grad_target_text;
  decode_backward(model, cfg, enc, dec, labels, grad_hidden, grad_target_text, grads);
  encoder_backward(model, input, enc_cache, grad_hidden, grad_target_text, grads);
  return loss;
}

// ---- selection ----

std::vector<std::size_t> select_within_budget(std::span<const double> scores,
                                              std::span<const std::size_t> token_counts,
                                              const std::vector<bool>& valid,
                                              std::size_t word_budget) {
  if (word_budget == 0) throw Error(ErrorCategory::invalid_argument, "word budget must be at least 1");
  if (scores.size() != token_counts.size() || scores.size() != valid.size())
    throw Error(ErrorCategory::dimension_mismatch, "selection inputs must be parallel");
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (valid[i]) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::size_t> chosen;
  std::size_t used = 0;
  for (std::size_t i : order) {
    if (used + token_counts[i] > word_budget) break;
    used += token_counts[i];
    chosen.push_back(i);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::vector<std::size_t> extract_summary(const SummarizerModel& model, const AttentionConfig& cfg,
                                         const EncodedTarget& enc, std::size_t word_budget) {
  const std::vector<double> probs = decode_sequence(model, cfg, enc);
  std::vector<std::size_t> chosen = select_within_budget(probs, enc.token_counts, enc.valid, word_budget);
  if (chosen.empty() && std::find(enc.valid.begin(), enc.valid.end(), true) != enc.valid.end())
    std::cerr << "warning: word budget " << word_budget << " is smaller than the top-ranked sentence\n";
  return chosen;
}

}  // namespace relsum
