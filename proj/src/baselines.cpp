#include <algorithm>
#include <functional>
#include <random>
#include <unordered_set>

#include "pga/attack.hpp"

namespace pga {

namespace {

/// Flip bookkeeping shared by the random baselines. Every pair is touched at
/// most once: deletions come from untouched clean edges, additions from
/// untouched clean non-edges.
class RandomFlipper {
 public:
  using PairFilter = std::function<bool(NodeId, NodeId)>;

  /// `addable` is the number of clean non-edges accepted by `add_ok`.
  RandomFlipper(const Graph& g, std::uint64_t seed, PairFilter add_ok, PairFilter del_ok, std::size_t addable)
      : g_(g), gen_(seed), add_ok_(std::move(add_ok)), addable_(addable) {
    for (const Edge& e : g.edges())
      if (del_ok(e.u, e.v)) deletable_.push_back(e);
  }

  Perturbation run(std::size_t budget) {
    Perturbation p;
    p.base_edge_count = g_.num_edges();
    p.budget = budget;
    std::bernoulli_distribution coin(0.5);
    while (p.flips.size() < budget) {
      const bool want_add = coin(gen_);
      const bool can_add = addable_ > 0;
      const bool can_del = !deletable_.empty();
      if (!can_add && !can_del) break;
      const bool add = can_add && (want_add || !can_del);
      p.flips.push_back(add ? Flip{FlipOp::add, draw_addition()} : Flip{FlipOp::del, draw_deletion()});
    }
    return p;
  }

 private:
  Edge draw_deletion() {
    std::uniform_int_distribution<std::size_t> pick(0, deletable_.size() - 1);
    const std::size_t i = pick(gen_);
    const Edge e = deletable_[i];
    deletable_[i] = deletable_.back();
    deletable_.pop_back();
    return e;
  }

  bool feasible_addition(NodeId u, NodeId v) const {
    if (u == v || g_.has_edge(u, v) || !add_ok_(u, v)) return false;
    return !added_.contains(edge_key(make_edge(u, v)));
  }

  Edge draw_addition() {
    const NodeId n = g_.num_nodes();
    std::uniform_int_distribution<NodeId> node(0, n - 1);
    for (int attempt = 0; attempt < 256; ++attempt) {
      const NodeId u = node(gen_), v = node(gen_);
      if (feasible_addition(u, v)) return record(make_edge(u, v));
    }
    // Dense regime: pick uniformly among the enumerated feasible pairs.
    std::uniform_int_distribution<std::size_t> pick(0, addable_ - 1);
    std::size_t k = pick(gen_);
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = u + 1; v < n; ++v)
        if (feasible_addition(u, v) && k-- == 0) return record({u, v});
    throw Error("random attacker lost track of feasible additions");
  }

  Edge record(Edge e) {
    added_.insert(edge_key(e));
    --addable_;
    return e;
  }

  const Graph& g_;
  std::mt19937_64 gen_;
  PairFilter add_ok_;
  std::vector<Edge> deletable_;
  std::unordered_set<std::uint64_t> added_;
  std::size_t addable_ = 0;
};

}  // namespace

Perturbation run_random(const GraphBundle& bundle, const AttackConfig& cfg) {
  cfg.validate();
  auto any = [](NodeId, NodeId) { return true; };
  const auto n = static_cast<std::size_t>(bundle.num_nodes());
  RandomFlipper flipper(bundle.graph, cfg.seed, any, any, n * (n - (n > 0)) / 2 - bundle.graph.num_edges());
  return flipper.run(cfg.budget(bundle.graph.num_edges()));
}

std::vector<int> visible_labels(const GraphBundle& bundle, const Prediction<double>& surrogate_pred) {
  std::vector<int> labels = surrogate_pred.pred;
  for (NodeId v : bundle.train_idx) labels[v] = bundle.labels[v];
  return labels;
}

Perturbation run_dice(const GraphBundle& bundle, const AttackConfig& cfg, std::span<const int> labels) {
  cfg.validate();
  if (static_cast<NodeId>(labels.size()) != bundle.num_nodes()) throw Error("DICE labels do not cover every node");
  std::vector<int> lab(labels.begin(), labels.end());
  // Cross-label non-edges: all cross-label pairs minus cross-label edges.
  std::vector<std::size_t> class_size;
  for (int y : lab) {
    if (y < 0) throw Error("negative DICE label");
    if (static_cast<std::size_t>(y) >= class_size.size()) class_size.resize(static_cast<std::size_t>(y) + 1, 0);
    ++class_size[y];
  }
  const auto n = static_cast<std::size_t>(bundle.num_nodes());
  std::size_t cross = n * (n - (n > 0)) / 2;
  for (std::size_t c : class_size) cross -= c * (c - (c > 0)) / 2;
  for (const Edge& e : bundle.graph.edges()) cross -= lab[e.u] != lab[e.v];
  RandomFlipper flipper(
      bundle.graph, cfg.seed, [lab](NodeId u, NodeId v) { return lab[u] != lab[v]; },
      [lab](NodeId u, NodeId v) { return lab[u] == lab[v]; }, cross);
  return flipper.run(cfg.budget(bundle.graph.num_edges()));
}

}  // namespace pga
