#include "pga/attack.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace pga {

std::string to_string(Attacker a) {
  switch (a) {
    case Attacker::pga: return "pga";
    case Attacker::random: return "random";
    case Attacker::dice: return "dice";
    case Attacker::full_greedy: return "full_greedy";
  }
  return "?";
}

Attacker parse_attacker(const std::string& s) {
  if (s == "pga") return Attacker::pga;
  if (s == "random") return Attacker::random;
  if (s == "dice") return Attacker::dice;
  if (s == "full_greedy") return Attacker::full_greedy;
  throw Error("unknown attacker '" + s + "' (expected pga, random, dice or full_greedy)");
}

void AttackConfig::validate() const {
  if (budget_rate.has_value() == budget_abs.has_value())
    throw Error("exactly one of budget_rate and budget_abs must be set");
  if (budget_rate && !(*budget_rate >= 0)) throw Error("budget_rate must be non-negative");
  if (greedy_step < 1) throw Error("greedy_step must be at least 1");
  if (removal_hops < 1) throw Error("removal_hops must be at least 1");
  if (top_k && *top_k < 1) throw Error("top_k must be at least 1");
  selection.validate();
}

std::size_t AttackConfig::budget(std::size_t n_edges) const {
  if (budget_abs) return *budget_abs;
  return static_cast<std::size_t>(std::floor(*budget_rate * static_cast<double>(n_edges) + 1e-9));
}

std::size_t AttackConfig::effective_top_k(std::size_t budget) const {
  if (top_k) return *top_k;
  return std::max<std::size_t>(1, 10 * budget);
}

namespace {

void check_surrogate(const GraphBundle& b, const ModelParams<double>& s) {
  if (s.num_features() != b.features.cols())
    throw Error("surrogate expects " + std::to_string(s.num_features()) + " features, graph has " +
                std::to_string(b.features.cols()));
  if (s.num_classes() != b.num_classes)
    throw Error("surrogate predicts " + std::to_string(s.num_classes()) + " classes, graph has " +
                std::to_string(b.num_classes));
}

}  // namespace

Perturbation greedy_attack(const Graph& clean, const ModelParams<double>& surrogate,
                           const RowMatrix<double>& projected, const std::vector<int>& pseudo,
                           std::span<const NodeId> targets, std::vector<Edge> candidates, std::size_t budget,
                           int greedy_step, std::vector<IterationRecord>* log) {
  Perturbation out;
  out.base_edge_count = clean.num_edges();
  out.budget = budget;
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  Graph current = clean;
  for (int t = 0; out.flips.size() < budget && !candidates.empty(); ++t) {
    const EdgeScorer<double> scorer(surrogate, current, projected, pseudo, targets);
    const std::vector<double> scores = scorer.scores(candidates);

    const std::size_t take =
        std::min({static_cast<std::size_t>(greedy_step), budget - out.flips.size(), candidates.size()});
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    // Candidates are sorted, so index order is canonical edge order.
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::size_t a, std::size_t b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); });

    IterationRecord rec;
    rec.t = t;
    rec.loss_before = scorer.loss();
    std::vector<char> chosen(candidates.size(), 0);
    for (std::size_t k = 0; k < take; ++k) {
      const std::size_t i = order[k];
      chosen[i] = 1;
      const Edge e = candidates[i];
      rec.flips.push_back({current.has_edge(e) ? FlipOp::del : FlipOp::add, e});
      rec.scores.push_back(scores[i]);
      if (scores[i] <= 0) ++rec.negative_score_flips;
    }
    current = apply_flips(current, rec.flips);
    out.flips.insert(out.flips.end(), rec.flips.begin(), rec.flips.end());
    out.negative_score_flips += rec.negative_score_flips;

    std::size_t w = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i)
      if (!chosen[i]) candidates[w++] = candidates[i];
    candidates.resize(w);

    if (log) {
      const Prediction<double> after = forward_projected(surrogate, normalize_adjacency<double>(current), projected);
      rec.loss_after = attack_loss(after, scorer.state(), targets);
      log->push_back(std::move(rec));
    }
  }
  return out;
}

Perturbation run_pga(const GraphBundle& bundle, const ModelParams<double>& surrogate, const AttackConfig& cfg,
                     AttackTrace* trace) {
  cfg.validate();
  check_surrogate(bundle, surrogate);
  const std::size_t budget = cfg.budget(bundle.graph.num_edges());
  Perturbation empty;
  empty.base_edge_count = bundle.graph.num_edges();
  empty.budget = budget;
  if (budget == 0) return empty;

  const RowMatrix<double> projected = project_features(surrogate, bundle.features);
  const Prediction<double> clean_pred =
      forward_projected(surrogate, normalize_adjacency<double>(bundle.graph), projected);
  TargetSet targets = select_targets(clean_pred, bundle, cfg.selection);
  const PseudoLabelState state = PseudoLabelState::from_prediction(clean_pred, targets.nodes);
  CandidatePools pools = build_pools(clean_pred, targets.nodes, bundle, surrogate, state,
                                     cfg.effective_top_k(budget), cfg.removal_hops);

  std::vector<Edge> candidates = pools.add_edges;
  candidates.insert(candidates.end(), pools.rem_edges.begin(), pools.rem_edges.end());
  Perturbation p = greedy_attack(bundle.graph, surrogate, projected, state.pseudo, targets.nodes,
                                 std::move(candidates), budget, cfg.greedy_step,
                                 trace ? &trace->iterations : nullptr);
  if (trace) {
    trace->targets = std::move(targets);
    trace->pools = std::move(pools);
  }
  return p;
}

Perturbation run_full_greedy(const GraphBundle& bundle, const ModelParams<double>& surrogate,
                             const AttackConfig& cfg, AttackTrace* trace) {
  cfg.validate();
  check_surrogate(bundle, surrogate);
  const NodeId n = bundle.num_nodes();
  if (n > full_greedy_max_nodes)
    throw Error("full greedy is limited to " + std::to_string(full_greedy_max_nodes) + " nodes, graph has " +
                std::to_string(n));
  const std::size_t budget = cfg.budget(bundle.graph.num_edges());
  const std::vector<NodeId> targets = bundle.unlabeled();
  if (targets.empty()) throw Error("no unlabeled nodes to attack");

  const RowMatrix<double> projected = project_features(surrogate, bundle.features);
  const Prediction<double> clean_pred =
      forward_projected(surrogate, normalize_adjacency<double>(bundle.graph), projected);
  std::vector<Edge> candidates;
  candidates.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v) candidates.push_back({u, v});
  return greedy_attack(bundle.graph, surrogate, projected, clean_pred.pred, targets, std::move(candidates), budget,
                       cfg.greedy_step, trace ? &trace->iterations : nullptr);
}

}  // namespace pga
