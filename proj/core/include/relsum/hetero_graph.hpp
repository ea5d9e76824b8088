#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relsum/corpus.hpp"

namespace relsum {

enum class NodeKind : std::uint8_t { paper, author, keyword, venue };

std::string_view to_string(NodeKind kind) noexcept;
NodeKind parse_node_kind(std::string_view text);

struct NodeId {
  NodeKind kind = NodeKind::paper;
  std::string key;

  auto operator<=>(const NodeId&) const = default;
  bool operator==(const NodeId&) const = default;

  static NodeId paper(std::string key) { return {NodeKind::paper, std::move(key)}; }
  static NodeId author(std::string key) { return {NodeKind::author, std::move(key)}; }
  static NodeId keyword(std::string key) { return {NodeKind::keyword, std::move(key)}; }
  static NodeId venue(std::string key) { return {NodeKind::venue, std::move(key)}; }

  /// "kind:key", used as the identifier in embedding files.
  std::string label() const;
  static NodeId from_label(std::string_view label);
};

inline constexpr int kEdgeTypeCount = 10;

// Edge types are numbered 1..10 everywhere they are persisted.
namespace edge_type {
inline constexpr int cites = 1;          // paper -> paper
inline constexpr int cited_by = 2;       // paper -> paper (reverse of cites)
inline constexpr int contribution = 3;   // author -> paper
inline constexpr int written_by = 4;     // paper -> author
inline constexpr int coauthor = 5;       // author -> author
inline constexpr int mentions = 6;       // paper -> keyword
inline constexpr int mentioned_in = 7;   // keyword -> paper
inline constexpr int published_in = 8;   // paper -> venue
inline constexpr int publishes = 9;      // venue -> paper
inline constexpr int cooccurs = 10;      // keyword -> keyword
}  // namespace edge_type

struct TypedEdge {
  NodeId from;
  NodeId to;
  int type = 1;
  double base_weight = 1.0;
};

/// Edge-type usefulness distribution: one weight per edge type.
struct EudVector {
  std::array<double, kEdgeTypeCount> values{};

  static EudVector uniform(double v = 1.0) {
    EudVector e;
    e.values.fill(v);
    return e;
  }
  double operator[](int edge_type) const { return values.at(static_cast<std::size_t>(edge_type - 1)); }
  double& operator[](int edge_type) { return values.at(static_cast<std::size_t>(edge_type - 1)); }
  bool operator==(const EudVector&) const = default;
};

/// Directed multigraph over typed nodes. Nodes are stored in sorted order and
/// each node's out-arcs in (target, type) order, so every computation over
/// the graph is independent of the order edges were supplied in.
class HeteroGraph {
 public:
  struct Arc {
    std::uint32_t to;
    std::uint8_t type;
    double base_weight;
  };

  HeteroGraph() = default;

  /// Throws Error(invalid_argument) on an edge with an unknown endpoint, a
  /// type outside [1,10], a weight outside [0,1] or a repeated (from,to,type).
  static HeteroGraph from_edges(std::vector<NodeId> nodes, std::vector<TypedEdge> edges);

  /// Same as from_edges but assigns every edge 1 / (out-degree of its source
  /// within its type).
  static HeteroGraph with_uniform_weights(std::vector<NodeId> nodes, std::vector<TypedEdge> edges);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const;
  bool empty() const { return nodes_.empty(); }

  const NodeId& node(std::size_t index) const { return nodes_.at(index); }
  std::span<const NodeId> nodes() const { return nodes_; }
  std::optional<std::size_t> find(const NodeId& id) const;
  /// Throws Error(unknown_node).
  std::size_t index_of(const NodeId& id) const;

  std::span<const Arc> out_arcs(std::size_t index) const { return out_.at(index); }
  std::vector<TypedEdge> edges() const;

  /// Sorted indices of nodes adjacent to `index` in either direction.
  std::span<const std::uint32_t> neighbours(std::size_t index) const { return adjacent_.at(index); }
  bool adjacent(std::size_t a, std::size_t b) const;

  std::vector<std::size_t> paper_indices() const;

 private:
  std::vector<NodeId> nodes_;
  std::vector<std::vector<Arc>> out_;
  std::vector<std::vector<std::uint32_t>> adjacent_;
};

/// Year-scoped bibliography graph: papers with year <= cutoff_year plus their
/// authors, keywords and venue, with all ten edge types. Author->paper
/// weights follow each paper's PageRank in the citation subgraph, normalised
/// per author; all other types split uniformly. Throws Error(empty_graph)
/// when no paper qualifies.
HeteroGraph build_graph(const Corpus& corpus, int cutoff_year);

/// Tab-separated persistence: "kind\tkey" per node line and
/// "from_kind\tfrom_key\ttype\tto_kind\tto_key\tweight" per edge line, with
/// weights at 12 significant digits.
void save_graph(const HeteroGraph& graph, const std::filesystem::path& nodes_path,
                const std::filesystem::path& edges_path);
HeteroGraph load_graph(const std::filesystem::path& nodes_path,
                       const std::filesystem::path& edges_path);
std::string format_nodes(const HeteroGraph& graph);
std::string format_edges(const HeteroGraph& graph);

}  // namespace relsum
