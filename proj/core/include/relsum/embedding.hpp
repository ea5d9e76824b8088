#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relsum/hetero_graph.hpp"
#include "relsum/pagerank.hpp"
#include "relsum/rng.hpp"

namespace relsum {

struct Walk {
  std::vector<std::uint32_t> nodes;  // graph node indices
  std::size_t length() const { return nodes.size(); }
};

struct WalkOptions {
  std::size_t walks_per_node = 10;
  std::size_t walk_length = 40;  // counted in nodes, start included
  double return_p = 1.0;
  double inout_q = 1.0;
};

/// node2vec walks over the EUD-weighted transitions. After the first step the
/// next node x from current v (previous t) is drawn with probability
/// proportional to P(v,x) * bias, where bias is 1/p for x == t, 1 when x is
/// adjacent to t and 1/q otherwise. Walks end early at dangling nodes.
std::vector<Walk> generate_walks(const HeteroGraph& graph, const EudVector& eud,
                                 const WalkOptions& options, Rng& rng);

/// Second-order next-step distribution used by generate_walks, aligned with
/// the transition row of `current`. A `previous` of SIZE_MAX means first step.
std::vector<double> walk_step_weights(const HeteroGraph& graph, const TransitionTable& transitions,
                                      std::size_t previous, std::size_t current,
                                      const WalkOptions& options);

class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  bool contains(std::string_view id) const { return vectors_.find(id) != vectors_.end(); }

  /// Throws Error(dimension_mismatch) on a wrong length or non-finite value.
  void set(std::string id, std::vector<double> vec);
  /// Throws Error(invalid_argument) for an unknown id.
  std::span<const double> at(std::string_view id) const;
  Eigen::VectorXd vector(std::string_view id) const;

  auto begin() const { return vectors_.begin(); }
  auto end() const { return vectors_.end(); }

  bool operator==(const EmbeddingTable&) const = default;

 private:
  std::size_t dim_;
  std::map<std::string, std::vector<double>, std::less<>> vectors_;
};

/// Header "count dim", then "identifier v1 ... vd" per line.
std::string format_embeddings(const EmbeddingTable& table);
EmbeddingTable parse_embeddings(std::string_view text);
void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);
EmbeddingTable load_embeddings(const std::filesystem::path& path);

struct SkipGramOptions {
  std::size_t dim = 128;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;  // decays linearly to 1e-4 of its start value
};

/// Negative-sampling objective for one (center, context, negatives) triple:
/// -log sigmoid(u_o . v) - sum_k log sigmoid(-u_k . v).
double sgns_loss(const Eigen::VectorXd& center, const Eigen::VectorXd& context,
                 std::span<const Eigen::VectorXd> negatives);

struct SgnsGradients {
  Eigen::VectorXd center;
  Eigen::VectorXd context;
  std::vector<Eigen::VectorXd> negatives;
};

SgnsGradients sgns_gradients(const Eigen::VectorXd& center, const Eigen::VectorXd& context,
                             std::span<const Eigen::VectorXd> negatives);

/// Skip-gram with negative sampling (unigram^0.75 noise). Returns the input
/// vectors of every identifier that occurs at least once. Deterministic for
/// a given rng state and sequence order.
EmbeddingTable train_skipgram(std::span<const std::vector<std::string>> sequences,
                              const SkipGramOptions& options, Rng& rng);

struct NodeEmbeddingOptions {
  WalkOptions walks;
  SkipGramOptions skipgram;
  std::uint64_t seed = 0;
};

/// generate_walks followed by train_skipgram over node labels ("kind:key").
EmbeddingTable embed_nodes(const HeteroGraph& graph, const EudVector& eud,
                           const NodeEmbeddingOptions& options);

}  // namespace relsum
