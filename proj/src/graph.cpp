#include "pga/graph.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

namespace pga {

Edge make_edge(NodeId a, NodeId b) {
  if (a == b) throw Error("self-loop on node " + std::to_string(a));
  return a < b ? Edge{a, b} : Edge{b, a};
}

Graph::Graph(NodeId n_nodes) : n_nodes_(n_nodes), offsets_(static_cast<std::size_t>(n_nodes) + 1, 0) {
  if (n_nodes < 0) throw Error("negative node count");
}

Graph Graph::from_edges(NodeId n_nodes, std::span<const Edge> edges) {
  Graph g(n_nodes);
  std::vector<Edge> canon;
  canon.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= n_nodes || e.v >= n_nodes)
      throw Error("edge endpoint out of range: " + std::to_string(e.u) + " " + std::to_string(e.v));
    canon.push_back(make_edge(e.u, e.v));
  }
  std::sort(canon.begin(), canon.end());
  canon.erase(std::unique(canon.begin(), canon.end()), canon.end());

  std::vector<std::int64_t> deg(static_cast<std::size_t>(n_nodes), 0);
  for (const Edge& e : canon) {
    ++deg[e.u];
    ++deg[e.v];
  }
  for (NodeId v = 0; v < n_nodes; ++v) g.offsets_[v + 1] = g.offsets_[v] + deg[v];
  g.indices_.resize(static_cast<std::size_t>(g.offsets_.back()));
  std::vector<std::int64_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  // Canonical sorted order fills every row in ascending neighbor order.
  for (const Edge& e : canon) g.indices_[cursor[e.v]++] = e.u;
  for (const Edge& e : canon) g.indices_[cursor[e.u]++] = e.v;
  for (NodeId v = 0; v < n_nodes; ++v)
    std::sort(g.indices_.begin() + g.offsets_[v], g.indices_.begin() + g.offsets_[v + 1]);

  g.keys_.reserve(canon.size());
  for (const Edge& e : canon) g.keys_.insert(edge_key(e));
  return g;
}

bool Graph::has_edge(NodeId a, NodeId b) const {
  if (a == b) return false;
  return keys_.contains(edge_key(a < b ? Edge{a, b} : Edge{b, a}));
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < n_nodes_; ++u)
    for (NodeId v : neighbors(u))
      if (u < v) out.push_back({u, v});
  return out;
}

std::vector<int> Graph::degrees() const {
  std::vector<int> d(static_cast<std::size_t>(n_nodes_));
  for (NodeId v = 0; v < n_nodes_; ++v) d[v] = degree(v);
  return d;
}

namespace {

void check_flip(const Graph& g, Edge e, FlipOp op) {
  if (e.u == e.v) throw Error("self-loop on node " + std::to_string(e.u));
  if (e.u < 0 || e.v >= g.num_nodes() || e.v < 0 || e.u >= g.num_nodes())
    throw Error("flip endpoint out of range");
  const bool present = g.has_edge(e);
  if (op == FlipOp::add && present)
    throw Error("add on existing edge " + std::to_string(e.u) + " " + std::to_string(e.v));
  if (op == FlipOp::del && !present)
    throw Error("del on non-edge " + std::to_string(e.u) + " " + std::to_string(e.v));
}

}  // namespace

Graph apply_flip(const Graph& g, Edge e, FlipOp op) {
  const Flip f{op, e.u < e.v ? e : Edge{e.v, e.u}};
  return apply_flips(g, std::span<const Flip>(&f, 1));
}

Graph apply_flips(const Graph& g, std::span<const Flip> flips) {
  std::unordered_set<std::uint64_t> removed;
  std::vector<Edge> edges;
  bool interacting = false;
  {
    std::unordered_set<std::uint64_t> seen;
    for (const Flip& f : flips)
      if (!seen.insert(edge_key(make_edge(f.edge.u, f.edge.v))).second) interacting = true;
  }
  if (interacting) {
    // Sequential semantics when the same pair appears more than once.
    Graph cur = g;
    for (const Flip& f : flips) cur = apply_flip(cur, f.edge, f.op);
    return cur;
  }
  std::vector<Edge> added;
  for (const Flip& f : flips) {
    const Edge e = make_edge(f.edge.u, f.edge.v);
    check_flip(g, e, f.op);
    if (f.op == FlipOp::add) added.push_back(e);
    else removed.insert(edge_key(e));
  }
  edges.reserve(g.num_edges() + added.size());
  for (const Edge& e : g.edges())
    if (!removed.contains(edge_key(e))) edges.push_back(e);
  edges.insert(edges.end(), added.begin(), added.end());
  return Graph::from_edges(g.num_nodes(), edges);
}

std::vector<NodeId> k_hop_neighbors(const Graph& g, std::span<const NodeId> sources, int k) {
  if (k < 1) throw Error("k_hop_neighbors requires k >= 1");
  const NodeId n = g.num_nodes();
  std::vector<int> dist(static_cast<std::size_t>(n), -1);
  std::deque<NodeId> frontier;
  for (NodeId s : sources) {
    if (s < 0 || s >= n) throw Error("source index out of range: " + std::to_string(s));
    if (dist[s] != 0) {
      dist[s] = 0;
      frontier.push_back(s);
    }
  }
  while (!frontier.empty()) {
    const NodeId v = frontier.front();
    frontier.pop_front();
    if (dist[v] == k) continue;
    for (NodeId u : g.neighbors(v)) {
      if (dist[u] == -1) {
        dist[u] = dist[v] + 1;
        frontier.push_back(u);
      }
    }
  }
  std::vector<NodeId> out;
  for (NodeId v = 0; v < n; ++v)
    if (dist[v] > 0) out.push_back(v);
  return out;
}

std::vector<int> bfs_distances(const Graph& g, NodeId source) {
  std::vector<int> dist(static_cast<std::size_t>(g.num_nodes()), -1);
  std::deque<NodeId> q{source};
  dist[source] = 0;
  while (!q.empty()) {
    const NodeId v = q.front();
    q.pop_front();
    for (NodeId u : g.neighbors(v))
      if (dist[u] == -1) {
        dist[u] = dist[v] + 1;
        q.push_back(u);
      }
  }
  return dist;
}

int diameter(const Graph& g) {
  int best = 0;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    const auto d = bfs_distances(g, s);
    best = std::max(best, *std::max_element(d.begin(), d.end()));
  }
  return best;
}

std::vector<NodeId> GraphBundle::unlabeled() const {
  std::vector<NodeId> out(val_idx);
  out.insert(out.end(), test_idx.begin(), test_idx.end());
  std::sort(out.begin(), out.end());
  return out;
}

void GraphBundle::validate() const {
  const NodeId n = graph.num_nodes();
  if (features.rows() != n)
    throw Error("features have " + std::to_string(features.rows()) + " rows, expected " + std::to_string(n));
  if (static_cast<NodeId>(labels.size()) != n)
    throw Error("labels have " + std::to_string(labels.size()) + " entries, expected " + std::to_string(n));
  if (num_classes < 1) throw Error("n_classes must be positive");
  for (int y : labels)
    if (y < 0 || y >= num_classes) throw Error("label out of range: " + std::to_string(y));
  std::vector<char> owner(static_cast<std::size_t>(n), 0);
  auto mark = [&](const std::vector<NodeId>& idx, const char* name) {
    for (NodeId v : idx) {
      if (v < 0 || v >= n) throw Error(std::string(name) + " index out of range: " + std::to_string(v));
      if (owner[v]) throw Error("overlapping splits at node " + std::to_string(v));
      owner[v] = 1;
    }
  };
  mark(train_idx, "train");
  mark(val_idx, "val");
  mark(test_idx, "test");
  if (!features.allFinite()) throw Error("non-finite feature value");
}

GraphBundle GraphBundle::with_graph(Graph g) const {
  if (g.num_nodes() != graph.num_nodes()) throw Error("node count mismatch");
  GraphBundle out = *this;
  out.graph = std::move(g);
  return out;
}

std::size_t Perturbation::adds() const {
  return static_cast<std::size_t>(
      std::count_if(flips.begin(), flips.end(), [](const Flip& f) { return f.op == FlipOp::add; }));
}

std::size_t Perturbation::dels() const { return flips.size() - adds(); }

Graph apply_perturbation(const Graph& clean, const Perturbation& p) {
  if (p.flips.size() > p.budget) throw Error("perturbation exceeds its budget");
  std::unordered_set<std::uint64_t> seen;
  for (const Flip& f : p.flips)
    if (!seen.insert(edge_key(make_edge(f.edge.u, f.edge.v))).second)
      throw Error("edge flipped twice: " + std::to_string(f.edge.u) + " " + std::to_string(f.edge.v));
  return apply_flips(clean, p.flips);
}

}  // namespace pga
