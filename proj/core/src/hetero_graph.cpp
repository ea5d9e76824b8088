#include "relsum/hetero_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "relsum/checksum.hpp"
#include "relsum/error.hpp"
#include "relsum/pagerank.hpp"

namespace relsum {

std::string_view to_string(NodeKind kind) noexcept {
  switch (kind) {
    case NodeKind::paper: return "paper";
    case NodeKind::author: return "author";
    case NodeKind::keyword: return "keyword";
    case NodeKind::venue: return "venue";
  }
  return "paper";
}

NodeKind parse_node_kind(std::string_view text) {
  if (text == "paper") return NodeKind::paper;
  if (text == "author") return NodeKind::author;
  if (text == "keyword") return NodeKind::keyword;
  if (text == "venue") return NodeKind::venue;
  throw Error(ErrorCategory::parse, "unknown node kind: " + std::string(text));
}

std::string NodeId::label() const {
  std::string out(to_string(kind));
  out.push_back(':');
  out += key;
  return out;
}

NodeId NodeId::from_label(std::string_view label) {
  const auto colon = label.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCategory::parse, "node label without kind: " + std::string(label));
  }
  return {parse_node_kind(label.substr(0, colon)), std::string(label.substr(colon + 1))};
}

HeteroGraph HeteroGraph::from_edges(std::vector<NodeId> nodes, std::vector<TypedEdge> edges) {
  std::sort(nodes.begin(), nodes.end());
  if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end()) {
    throw Error(ErrorCategory::invalid_argument, "duplicate node in graph");
  }
  HeteroGraph g;
  g.nodes_ = std::move(nodes);
  g.out_.resize(g.nodes_.size());
  g.adjacent_.resize(g.nodes_.size());

  for (const auto& e : edges) {
    if (e.type < 1 || e.type > kEdgeTypeCount) {
      throw Error(ErrorCategory::invalid_argument, "edge type out of range");
    }
    if (!(e.base_weight >= 0.0 && e.base_weight <= 1.0)) {
      throw Error(ErrorCategory::invalid_argument, "edge base weight outside [0,1]");
    }
    const auto from = g.find(e.from);
    const auto to = g.find(e.to);
    if (!from || !to) {
      throw Error(ErrorCategory::invalid_argument,
                  "edge endpoint not in graph: " + e.from.label() + " -> " + e.to.label());
    }
    g.out_[*from].push_back(
        {static_cast<std::uint32_t>(*to), static_cast<std::uint8_t>(e.type), e.base_weight});
  }
  for (std::size_t i = 0; i < g.out_.size(); ++i) {
    auto& arcs = g.out_[i];
    std::sort(arcs.begin(), arcs.end(), [](const Arc& a, const Arc& b) {
      return a.to != b.to ? a.to < b.to : a.type < b.type;
    });
    for (std::size_t k = 1; k < arcs.size(); ++k) {
      if (arcs[k].to == arcs[k - 1].to && arcs[k].type == arcs[k - 1].type) {
        throw Error(ErrorCategory::invalid_argument,
                    "repeated edge " + g.nodes_[i].label() + " -> " + g.nodes_[arcs[k].to].label());
      }
    }
    for (const auto& a : arcs) {
      g.adjacent_[i].push_back(a.to);
      g.adjacent_[a.to].push_back(static_cast<std::uint32_t>(i));
    }
  }
  for (auto& adj : g.adjacent_) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  return g;
}

HeteroGraph HeteroGraph::with_uniform_weights(std::vector<NodeId> nodes,
                                              std::vector<TypedEdge> edges) {
  std::map<std::pair<NodeId, int>, std::size_t> degree;
  for (const auto& e : edges) ++degree[{e.from, e.type}];
  for (auto& e : edges) e.base_weight = 1.0 / static_cast<double>(degree[{e.from, e.type}]);
  return from_edges(std::move(nodes), std::move(edges));
}

std::size_t HeteroGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& arcs : out_) n += arcs.size();
  return n;
}

std::optional<std::size_t> HeteroGraph::find(const NodeId& id) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id);
  if (it == nodes_.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - nodes_.begin());
}

std::size_t HeteroGraph::index_of(const NodeId& id) const {
  if (auto i = find(id)) return *i;
  throw Error(ErrorCategory::unknown_node, "node not in graph: " + id.label());
}

std::vector<TypedEdge> HeteroGraph::edges() const {
  std::vector<TypedEdge> out;
  out.reserve(edge_count());
  for (std::size_t i = 0; i < out_.size(); ++i) {
    for (const auto& a : out_[i]) out.push_back({nodes_[i], nodes_[a.to], a.type, a.base_weight});
  }
  return out;
}

bool HeteroGraph::adjacent(std::size_t a, std::size_t b) const {
  const auto& adj = adjacent_.at(a);
  return std::binary_search(adj.begin(), adj.end(), static_cast<std::uint32_t>(b));
}

std::vector<std::size_t> HeteroGraph::paper_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == NodeKind::paper) out.push_back(i);
  }
  return out;
}

namespace {

// Adds uniform-weight edges for every (source -> set of targets) entry.
void add_uniform(std::vector<TypedEdge>& edges, const std::map<NodeId, std::set<NodeId>>& adjacency,
                 int type) {
  for (const auto& [from, targets] : adjacency) {
    const double w = 1.0 / static_cast<double>(targets.size());
    for (const auto& to : targets) edges.push_back({from, to, type, w});
  }
}

}  // namespace

HeteroGraph build_graph(const Corpus& corpus, int cutoff_year) {
  std::vector<const CorpusRecord*> papers;
  for (const auto& [id, rec] : corpus) {
    if (rec.year <= cutoff_year) papers.push_back(&rec);
  }
  if (papers.empty()) {
    throw Error(ErrorCategory::empty_graph,
                "no papers published on or before " + std::to_string(cutoff_year));
  }
  std::set<std::string> in_slice;
  for (const auto* p : papers) in_slice.insert(p->paper_id);

  std::set<NodeId> nodes;
  std::map<NodeId, std::set<NodeId>> cites, cited_by, written_by, coauthor, mentions, mentioned_in,
      published_in, publishes, cooccurs;
  std::map<std::string, std::set<std::string>> author_papers;

  for (const auto* p : papers) {
    const auto pid = NodeId::paper(p->paper_id);
    nodes.insert(pid);
    for (const auto& ref : p->references) {
      if (!in_slice.count(ref.paper_id)) continue;
      const auto rid = NodeId::paper(ref.paper_id);
      cites[pid].insert(rid);
      cited_by[rid].insert(pid);
    }
    for (const auto& a : p->authors) {
      const auto aid = NodeId::author(a);
      nodes.insert(aid);
      written_by[pid].insert(aid);
      author_papers[a].insert(p->paper_id);
      for (const auto& other : p->authors) {
        if (other != a) coauthor[aid].insert(NodeId::author(other));
      }
    }
    for (const auto& k : p->keywords) {
      const auto kid = NodeId::keyword(k);
      nodes.insert(kid);
      mentions[pid].insert(kid);
      mentioned_in[kid].insert(pid);
      for (const auto& other : p->keywords) {
        if (other != k) cooccurs[kid].insert(NodeId::keyword(other));
      }
    }
    if (!p->venue.empty()) {
      const auto vid = NodeId::venue(p->venue);
      nodes.insert(vid);
      published_in[pid].insert(vid);
      publishes[vid].insert(pid);
    }
  }

  std::vector<TypedEdge> edges;
  add_uniform(edges, cites, edge_type::cites);
  add_uniform(edges, cited_by, edge_type::cited_by);
  add_uniform(edges, written_by, edge_type::written_by);
  add_uniform(edges, coauthor, edge_type::coauthor);
  add_uniform(edges, mentions, edge_type::mentions);
  add_uniform(edges, mentioned_in, edge_type::mentioned_in);
  add_uniform(edges, published_in, edge_type::published_in);
  add_uniform(edges, publishes, edge_type::publishes);
  add_uniform(edges, cooccurs, edge_type::cooccurs);

  // Contribution weights: prior-free PageRank over the citation subgraph.
  std::vector<NodeId> paper_nodes;
  for (const auto* p : papers) paper_nodes.push_back(NodeId::paper(p->paper_id));
  std::vector<TypedEdge> citation_edges;
  add_uniform(citation_edges, cites, edge_type::cites);
  const auto citation_graph = HeteroGraph::from_edges(paper_nodes, std::move(citation_edges));
  EudVector citation_only{};
  citation_only[edge_type::cites] = 1.0;
  const std::vector<double> uniform_prior(citation_graph.node_count(),
                                          1.0 / static_cast<double>(citation_graph.node_count()));
  const auto citation_rank = pagerank_with_priors(citation_graph, citation_only, uniform_prior);

  for (const auto& [author, pids] : author_papers) {
    double total = 0.0;
    for (const auto& pid : pids) {
      total += citation_rank.values[citation_graph.index_of(NodeId::paper(pid))];
    }
    for (const auto& pid : pids) {
      const double score = citation_rank.values[citation_graph.index_of(NodeId::paper(pid))];
      const double w = total > 0.0 ? score / total : 1.0 / static_cast<double>(pids.size());
      edges.push_back({NodeId::author(author), NodeId::paper(pid), edge_type::contribution, w});
    }
  }

  return HeteroGraph::from_edges(std::vector<NodeId>(nodes.begin(), nodes.end()), std::move(edges));
}

std::string format_nodes(const HeteroGraph& graph) {
  std::string out;
  for (const auto& n : graph.nodes()) {
    out += to_string(n.kind);
    out.push_back('\t');
    out += n.key;
    out.push_back('\n');
  }
  return out;
}

std::string format_edges(const HeteroGraph& graph) {
  std::string out;
  char weight[32];
  for (const auto& e : graph.edges()) {
    std::snprintf(weight, sizeof weight, "%.12g", e.base_weight);
    out += to_string(e.from.kind);
    out += '\t' + e.from.key + '\t' + std::to_string(e.type) + '\t';
    out += to_string(e.to.kind);
    out += '\t' + e.to.key + '\t' + weight + '\n';
  }
  return out;
}

void save_graph(const HeteroGraph& graph, const std::filesystem::path& nodes_path,
                const std::filesystem::path& edges_path) {
  write_file_atomic(nodes_path, format_nodes(graph));
  write_file_atomic(edges_path, format_edges(graph));
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

}  // namespace

HeteroGraph load_graph(const std::filesystem::path& nodes_path,
                       const std::filesystem::path& edges_path) {
  std::vector<NodeId> nodes;
  {
    std::istringstream in(read_file(nodes_path));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_tabs(line);
      if (f.size() != 2) throw Error(ErrorCategory::parse, "bad node line: " + line);
      nodes.push_back({parse_node_kind(f[0]), f[1]});
    }
  }
  std::vector<TypedEdge> edges;
  {
    std::istringstream in(read_file(edges_path));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_tabs(line);
      if (f.size() != 6) throw Error(ErrorCategory::parse, "bad edge line: " + line);
      try {
        edges.push_back({{parse_node_kind(f[0]), f[1]},
                         {parse_node_kind(f[3]), f[4]},
                         std::stoi(f[2]),
                         std::stod(f[5])});
      } catch (const std::logic_error&) {
        throw Error(ErrorCategory::parse, "bad edge line: " + line);
      }
    }
  }
  return HeteroGraph::from_edges(std::move(nodes), std::move(edges));
}

}  // namespace relsum
