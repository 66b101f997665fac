#include "pga/anchors.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace pga {

int second_class(const Prediction<double>& pred, NodeId v) {
  const auto row = pred.probs.row(v);
  return runner_up_class(row, argmax_row(row));
}

std::vector<NodeId> second_class_set(const Prediction<double>& pred, NodeId v) {
  const int c = second_class(pred, v);
  std::vector<NodeId> out;
  if (c < 0) return out;
  for (NodeId u = 0; u < static_cast<NodeId>(pred.pred.size()); ++u)
    if (pred.pred[u] == c) out.push_back(u);
  return out;
}

std::vector<FakeEdge> fake_edges(const Prediction<double>& pred, std::span<const NodeId> targets, const Graph& g) {
  // Nodes grouped by predicted class, so each target scans one bucket.
  std::vector<std::vector<NodeId>> by_class(static_cast<std::size_t>(pred.num_classes()));
  for (NodeId u = 0; u < static_cast<NodeId>(pred.pred.size()); ++u) by_class[pred.pred[u]].push_back(u);

  std::vector<FakeEdge> raw;
  for (NodeId v : targets) {
    const int c = second_class(pred, v);
    if (c < 0) continue;
    for (NodeId u : by_class[c]) {
      if (u == v || g.has_edge(u, v)) continue;
      const Edge e = make_edge(u, v);
      raw.push_back({e, e.u == u, e.v == u});
    }
  }
  std::sort(raw.begin(), raw.end(), [](const FakeEdge& a, const FakeEdge& b) { return a.edge < b.edge; });
  std::vector<FakeEdge> out;
  for (const FakeEdge& f : raw) {
    if (!out.empty() && out.back().edge == f.edge) {
      out.back().u_is_anchor |= f.u_is_anchor;
      out.back().v_is_anchor |= f.v_is_anchor;
    } else {
      out.push_back(f);
    }
  }
  return out;
}

AddPool build_add_pool(const Prediction<double>& pred, std::span<const NodeId> targets, const GraphBundle& bundle,
                       const ModelParams<double>& params, const PseudoLabelState& state, std::size_t top_k) {
  if (top_k < 1) throw Error("top_k must be at least 1");
  const std::vector<FakeEdge> fake = fake_edges(pred, targets, bundle.graph);
  if (fake.empty()) throw NoAddCandidates("no second-class anchor forms a new edge with any target");

  std::vector<Edge> edges;
  edges.reserve(fake.size());
  for (const FakeEdge& f : fake) edges.push_back(f.edge);
  const EdgeScorer<double> scorer(params, bundle.graph, project_features(params, bundle.features), state.pseudo,
                                  targets);
  const std::vector<double> scores = scorer.scores(edges);

  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), 0);
  // `edges` is canonically sorted, so a stable sort keeps canonical tie order.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(std::min(top_k, order.size()));

  AddPool pool;
  pool.pruned_from = fake.size();
  for (std::size_t i : order) {
    pool.edges.push_back(fake[i].edge);
    pool.scores.push_back(scores[i]);
    if (fake[i].u_is_anchor) pool.anchors.push_back(fake[i].edge.u);
    if (fake[i].v_is_anchor) pool.anchors.push_back(fake[i].edge.v);
  }
  std::sort(pool.anchors.begin(), pool.anchors.end());
  pool.anchors.erase(std::unique(pool.anchors.begin(), pool.anchors.end()), pool.anchors.end());
  return pool;
}

RemovePool build_remove_pool(const Graph& g, std::span<const NodeId> targets, int hops) {
  RemovePool pool;
  pool.anchors = k_hop_neighbors(g, targets, hops);
  std::vector<char> admissible(static_cast<std::size_t>(g.num_nodes()), 0);
  for (NodeId a : pool.anchors) admissible[a] = 1;
  for (NodeId t : targets) admissible[t] = 1;
  for (NodeId t : targets)
    for (NodeId u : g.neighbors(t))
      if (admissible[u]) pool.edges.push_back(make_edge(t, u));
  std::sort(pool.edges.begin(), pool.edges.end());
  pool.edges.erase(std::unique(pool.edges.begin(), pool.edges.end()), pool.edges.end());
  return pool;
}

CandidatePools build_pools(const Prediction<double>& pred, std::span<const NodeId> targets, const GraphBundle& bundle,
                           const ModelParams<double>& params, const PseudoLabelState& state, std::size_t top_k,
                           int hops) {
  CandidatePools pools;
  try {
    AddPool add = build_add_pool(pred, targets, bundle, params, state, top_k);
    pools.add_anchors = std::move(add.anchors);
    pools.add_edges = std::move(add.edges);
    pools.pruned_from = add.pruned_from;
  } catch (const NoAddCandidates&) {
  }
  RemovePool rem = build_remove_pool(bundle.graph, targets, hops);
  pools.rem_anchors = std::move(rem.anchors);
  pools.rem_edges = std::move(rem.edges);
  return pools;
}

nlohmann::json to_json(const CandidatePools& pools) {
  auto edges = [](const std::vector<Edge>& es) {
    nlohmann::json a = nlohmann::json::array();
    for (const Edge& e : es) a.push_back({e.u, e.v});
    return a;
  };
  return {{"add_edges", edges(pools.add_edges)},
          {"rem_edges", edges(pools.rem_edges)},
          {"pruned_from", pools.pruned_from}};
}

}  // namespace pga
