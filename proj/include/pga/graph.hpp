#ifndef PGA_GRAPH_HPP
#define PGA_GRAPH_HPP

#include <cstddef>
#include <cstdint>
#include <compare>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

namespace pga {

using NodeId = std::int32_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Undirected edge in canonical form (u < v).
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  auto operator<=>(const Edge&) const = default;
};

/// Canonicalizes an unordered pair; throws on a self-loop.
Edge make_edge(NodeId a, NodeId b);

inline std::uint64_t edge_key(Edge e) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(e.u)) << 32) |
         static_cast<std::uint32_t>(e.v);
}

enum class FlipOp { add, del };

struct Flip {
  FlipOp op = FlipOp::add;
  Edge edge;

  bool operator==(const Flip&) const = default;
};

/// Immutable simple undirected graph stored as sorted neighbor lists (CSR)
/// plus an edge hash set for constant-time membership.
class Graph {
 public:
  Graph() = default;
  explicit Graph(NodeId n_nodes);

  /// Symmetrizes and deduplicates; rejects self-loops and out-of-range ids.
  static Graph from_edges(NodeId n_nodes, std::span<const Edge> edges);

  NodeId num_nodes() const { return n_nodes_; }
  std::size_t num_edges() const { return keys_.size(); }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {indices_.data() + offsets_[v], indices_.data() + offsets_[v + 1]};
  }
  int degree(NodeId v) const { return static_cast<int>(offsets_[v + 1] - offsets_[v]); }
  bool has_edge(NodeId a, NodeId b) const;
  bool has_edge(Edge e) const { return keys_.contains(edge_key(e)); }

  /// All edges, canonical and sorted.
  std::vector<Edge> edges() const;
  std::vector<int> degrees() const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_nodes_ == b.n_nodes_ && a.offsets_ == b.offsets_ && a.indices_ == b.indices_;
  }

 private:
  NodeId n_nodes_ = 0;
  std::vector<std::int64_t> offsets_{0};
  std::vector<NodeId> indices_;
  std::unordered_set<std::uint64_t> keys_;
};

/// Returns a new graph with one edge toggled.
Graph apply_flip(const Graph& g, Edge e, FlipOp op);
Graph apply_flips(const Graph& g, std::span<const Flip> flips);

/// Nodes within `k` hops of any source, excluding the sources themselves.
std::vector<NodeId> k_hop_neighbors(const Graph& g, std::span<const NodeId> sources, int k);

/// Hop distances from a single source; -1 for unreachable nodes.
std::vector<int> bfs_distances(const Graph& g, NodeId source);

/// Largest finite shortest-path distance over all pairs.
int diameter(const Graph& g);

/// Attributed graph with labels and a transductive split.
struct GraphBundle {
  Graph graph;
  Eigen::MatrixXd features;
  std::vector<int> labels;
  int num_classes = 0;
  std::vector<NodeId> train_idx;
  std::vector<NodeId> val_idx;
  std::vector<NodeId> test_idx;

  NodeId num_nodes() const { return graph.num_nodes(); }
  /// Sorted union of val and test.
  std::vector<NodeId> unlabeled() const;
  /// Throws pga::Error describing the first broken invariant.
  void validate() const;
  /// Same bundle with a different adjacency.
  GraphBundle with_graph(Graph g) const;
};

struct Perturbation {
  std::vector<Flip> flips;
  std::size_t base_edge_count = 0;
  std::size_t budget = 0;
  std::size_t negative_score_flips = 0;

  std::size_t adds() const;
  std::size_t dels() const;
};

/// Checks the flip list against `clean` (feasibility, no repeats, budget) and
/// returns the perturbed graph.
Graph apply_perturbation(const Graph& clean, const Perturbation& p);

}  // namespace pga

#endif  // PGA_GRAPH_HPP
