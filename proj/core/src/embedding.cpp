#include "relsum/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "relsum/checksum.hpp"
#include "relsum/error.hpp"

namespace relsum {

std::vector<double> walk_step_weights(const HeteroGraph& graph, const TransitionTable& transitions,
                                      std::size_t previous, std::size_t current,
                                      const WalkOptions& options) {
  const auto row = transitions.row(current);
  std::vector<double> w(row.size());
  const bool first = previous == std::numeric_limits<std::size_t>::max();
  for (std::size_t k = 0; k < row.size(); ++k) {
    double bias = 1.0;
    if (!first) {
      if (row[k].to == previous) {
        bias = 1.0 / options.return_p;
      } else if (graph.adjacent(previous, row[k].to)) {
        bias = 1.0;
      } else {
        bias = 1.0 / options.inout_q;
      }
    }
    w[k] = row[k].probability * bias;
  }
  return w;
}

std::vector<Walk> generate_walks(const HeteroGraph& graph, const EudVector& eud,
                                 const WalkOptions& options, Rng& rng) {
  if (!(options.return_p > 0.0 && options.inout_q > 0.0)) {
    throw Error(ErrorCategory::invalid_argument, "walk parameters p and q must be positive");
  }
  const TransitionTable transitions(graph, eud);
  const bool first_order = options.return_p == 1.0 && options.inout_q == 1.0;
  std::vector<Walk> walks;
  walks.reserve(graph.node_count() * options.walks_per_node);
  std::vector<double> weights;

  for (std::size_t round = 0; round < options.walks_per_node; ++round) {
    for (std::size_t start = 0; start < graph.node_count(); ++start) {
      Walk walk;
      walk.nodes.push_back(static_cast<std::uint32_t>(start));
      std::size_t previous = std::numeric_limits<std::size_t>::max();
      std::size_t current = start;
      while (walk.nodes.size() < options.walk_length) {
        const auto row = transitions.row(current);
        if (row.empty()) break;
        if (first_order) {
          weights.resize(row.size());
          for (std::size_t k = 0; k < row.size(); ++k) weights[k] = row[k].probability;
        } else {
          weights = walk_step_weights(graph, transitions, previous, current, options);
        }
        const std::size_t pick = rng.pick_weighted(weights);
        if (pick >= row.size()) break;
        previous = current;
        current = row[pick].to;
        walk.nodes.push_back(static_cast<std::uint32_t>(current));
      }
      walks.push_back(std::move(walk));
    }
  }
  return walks;
}

void EmbeddingTable::set(std::string id, std::vector<double> vec) {
  if (vec.size() != dim_) {
    throw Error(ErrorCategory::dimension_mismatch, "embedding for " + id + " has wrong length");
  }
  for (double v : vec) {
    if (!std::isfinite(v)) throw Error(ErrorCategory::non_finite, "non-finite embedding for " + id);
  }
  vectors_.insert_or_assign(std::move(id), std::move(vec));
}

std::span<const double> EmbeddingTable::at(std::string_view id) const {
  auto it = vectors_.find(id);
  if (it == vectors_.end()) {
    throw Error(ErrorCategory::invalid_argument, "no embedding for " + std::string(id));
  }
  return it->second;
}

Eigen::VectorXd EmbeddingTable::vector(std::string_view id) const {
  const auto v = at(id);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string format_embeddings(const EmbeddingTable& table) {
  std::string out = std::to_string(table.size()) + " " + std::to_string(table.dim()) + "\n";
  char buf[40];
  for (const auto& [id, vec] : table) {
    out += id;
    for (double v : vec) {
      std::snprintf(buf, sizeof buf, " %.12g", v);
      out += buf;
    }
    out.push_back('\n');
  }
  return out;
}

EmbeddingTable parse_embeddings(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::size_t count = 0, dim = 0;
  if (!(in >> count >> dim)) throw Error(ErrorCategory::parse, "embedding header must be 'count dim'");
  EmbeddingTable table(dim);
  for (std::size_t i = 0; i < count; ++i) {
    std::string id;
    if (!(in >> id)) throw Error(ErrorCategory::parse, "embedding file truncated");
    std::vector<double> vec(dim);
    for (auto& v : vec) {
      if (!(in >> v)) throw Error(ErrorCategory::parse, "embedding row for " + id + " truncated");
    }
    table.set(std::move(id), std::move(vec));
  }
  return table;
}

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  write_file_atomic(path, format_embeddings(table));
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  return parse_embeddings(read_file(path));
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log sigmoid(x), stable for large |x|.
double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

}  // namespace

double sgns_loss(const Eigen::VectorXd& center, const Eigen::VectorXd& context,
                 std::span<const Eigen::VectorXd> negatives) {
  double loss = -log_sigmoid(context.dot(center));
  for (const auto& n : negatives) loss -= log_sigmoid(-n.dot(center));
  return loss;
}

SgnsGradients sgns_gradients(const Eigen::VectorXd& center, const Eigen::VectorXd& context,
                             std::span<const Eigen::VectorXd> negatives) {
  SgnsGradients g;
  const double gp = sigmoid(context.dot(center)) - 1.0;
  g.center = gp * context;
  g.context = gp * center;
  for (const auto& n : negatives) {
    const double gn = sigmoid(n.dot(center));
    g.center += gn * n;
    g.negatives.push_back(gn * center);
  }
  return g;
}

EmbeddingTable train_skipgram(std::span<const std::vector<std::string>> sequences,
                              const SkipGramOptions& options, Rng& rng) {
  if (options.dim < 2) throw Error(ErrorCategory::invalid_argument, "embedding dim must be >= 2");
  if (sequences.empty()) throw Error(ErrorCategory::invalid_argument, "no sequences to train on");

  // Vocabulary in order of first occurrence.
  std::unordered_map<std::string, std::uint32_t> index;
  std::vector<std::string> vocab;
  std::vector<double> freq;
  std::vector<std::vector<std::uint32_t>> corpus;
  corpus.reserve(sequences.size());
  std::size_t total_tokens = 0;
  for (const auto& seq : sequences) {
    std::vector<std::uint32_t> ids;
    ids.reserve(seq.size());
    for (const auto& tok : seq) {
      auto [it, inserted] = index.try_emplace(tok, static_cast<std::uint32_t>(vocab.size()));
      if (inserted) {
        vocab.push_back(tok);
        freq.push_back(0.0);
      }
      freq[it->second] += 1.0;
      ids.push_back(it->second);
    }
    total_tokens += ids.size();
    corpus.push_back(std::move(ids));
  }

  const auto dim = static_cast<Eigen::Index>(options.dim);
  const auto v = static_cast<Eigen::Index>(vocab.size());
  Eigen::MatrixXd input(dim, v);
  Eigen::MatrixXd output = Eigen::MatrixXd::Zero(dim, v);
  for (Eigen::Index c = 0; c < v; ++c) {
    for (Eigen::Index r = 0; r < dim; ++r) {
      input(r, c) = (rng.uniform01() - 0.5) / static_cast<double>(options.dim);
    }
  }

  std::vector<double> noise_cdf(vocab.size());
  {
    double acc = 0.0;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      acc += std::pow(freq[i], 0.75);
      noise_cdf[i] = acc;
    }
  }
  auto draw_noise = [&]() -> std::uint32_t {
    const double u = rng.uniform01() * noise_cdf.back();
    const auto it = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), u);
    return static_cast<std::uint32_t>(std::min<std::size_t>(it - noise_cdf.begin(), vocab.size() - 1));
  };

  const double total_work = static_cast<double>(options.epochs) * static_cast<double>(total_tokens);
  double done = 0.0;
  Eigen::VectorXd grad_center(dim);
  const auto window = static_cast<std::ptrdiff_t>(options.window);

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    for (const auto& seq : corpus) {
      const auto len = static_cast<std::ptrdiff_t>(seq.size());
      for (std::ptrdiff_t pos = 0; pos < len; ++pos) {
        const double lr =
            options.learning_rate * std::max(1e-4, 1.0 - done / std::max(1.0, total_work));
        done += 1.0;
        const auto center = seq[static_cast<std::size_t>(pos)];
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, pos - window);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(len - 1, pos + window);
        for (std::ptrdiff_t c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          const auto context = seq[static_cast<std::size_t>(c)];
          auto vc = input.col(center);
          grad_center.setZero();
          {
            auto uo = output.col(context);
            const double g = sigmoid(uo.dot(vc)) - 1.0;
            grad_center.noalias() += g * uo;
            uo.noalias() -= lr * g * vc;
          }
          for (std::size_t k = 0; k < options.negatives; ++k) {
            const auto neg = draw_noise();
            if (neg == context) continue;
            auto un = output.col(neg);
            const double g = sigmoid(un.dot(vc));
            grad_center.noalias() += g * un;
            un.noalias() -= lr * g * vc;
          }
          vc.noalias() -= lr * grad_center;
        }
      }
    }
  }

  EmbeddingTable table(options.dim);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const auto col = input.col(static_cast<Eigen::Index>(i));
    table.set(vocab[i], std::vector<double>(col.data(), col.data() + dim));
  }
  return table;
}

EmbeddingTable embed_nodes(const HeteroGraph& graph, const EudVector& eud,
                           const NodeEmbeddingOptions& options) {
  if (graph.empty()) throw Error(ErrorCategory::empty_graph, "cannot embed an empty graph");
  Rng rng(options.seed);
  const auto walks = generate_walks(graph, eud, options.walks, rng);
  std::vector<std::string> labels;
  labels.reserve(graph.node_count());
  for (const auto& n : graph.nodes()) labels.push_back(n.label());
  std::vector<std::vector<std::string>> sequences;
  sequences.reserve(walks.size());
  for (const auto& w : walks) {
    std::vector<std::string> seq;
    seq.reserve(w.nodes.size());
    for (auto idx : w.nodes) seq.push_back(labels[idx]);
    sequences.push_back(std::move(seq));
  }
  return train_skipgram(sequences, options.skipgram, rng);
}

}  // namespace relsum
