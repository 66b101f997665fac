#include "pga/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "pga/attack_objective.hpp"
#include "pga/graph_io.hpp"
#include "pga/selection.hpp"

namespace pga {

nlohmann::json to_json(const AttackReport& r) {
  return {{"mode", r.mode},
          {"clean_accuracy", r.clean_accuracy},
          {"attacked_accuracy", r.attacked_accuracy},
          {"budget", r.budget},
          {"flips_applied", r.flips_applied},
          {"adds", r.adds},
          {"dels", r.dels},
          {"negative_score_flips", r.negative_score_flips},
          {"hit_rate", r.hit_rate},
          {"hit_rate_budget", r.hit_rate_budget},
          {"vulnerable_deletions", r.vulnerable_deletions},
          {"degree_distance", r.degree_distance},
          {"runtime_ms", r.runtime_ms},
          {"seed", r.seed},
          {"config", r.config}};
}

namespace {

AttackReport base_report(const GraphBundle& bundle, const Perturbation& p, const Graph& perturbed) {
  AttackReport r;
  r.budget = p.budget;
  r.flips_applied = p.flips.size();
  r.adds = p.adds();
  r.dels = p.dels();
  r.negative_score_flips = p.negative_score_flips;
  r.degree_distance = degree_distance(bundle.graph, perturbed);
  return r;
}

}  // namespace

AttackReport evaluate_evasion(const ModelParams<double>& victim, const GraphBundle& bundle,
                              const Perturbation& perturbation) {
  const Graph perturbed = apply_perturbation(bundle.graph, perturbation);
  AttackReport r = base_report(bundle, perturbation, perturbed);
  r.clean_accuracy = accuracy(forward(victim, bundle.graph, bundle.features), bundle.labels, bundle.test_idx);
  r.attacked_accuracy = accuracy(forward(victim, perturbed, bundle.features), bundle.labels, bundle.test_idx);
  return r;
}

AttackReport evaluate_poisoning(const GraphBundle& bundle, const Perturbation& perturbation, Arch arch,
                                const TrainConfig& cfg) {
  const Graph perturbed = apply_perturbation(bundle.graph, perturbation);
  AttackReport r = base_report(bundle, perturbation, perturbed);
  r.mode = "poisoning";
  r.seed = cfg.seed;
  const ModelParams<double> clean = train(bundle, arch, cfg);
  r.clean_accuracy = accuracy(forward(clean, bundle.graph, bundle.features), bundle.labels, bundle.test_idx);
  const GraphBundle poisoned_bundle = bundle.with_graph(perturbed);
  const ModelParams<double> poisoned = train(poisoned_bundle, arch, cfg);
  r.attacked_accuracy = accuracy(forward(poisoned, perturbed, bundle.features), bundle.labels, bundle.test_idx);
  return r;
}

namespace {

/// Prediction of one node under at most two flips incident to a base graph,
/// recomputing only the node's two-hop receptive field.
class LocalPredictor {
 public:
  LocalPredictor(const ModelParams<double>& params, const Graph& g, const RowMatrix<double>& projected)
      : params_(params), g_(g), projected_(projected) {}

  /// Class probabilities of v with `flips` applied to the base graph.
  Eigen::RowVectorXd probs(NodeId v, std::span<const Flip> flips) const {
    flips_ = flips;
    const double dv = degree(v);
    Eigen::RowVectorXd second = Eigen::RowVectorXd::Zero(params_.W1.rows());
    auto add_term = [&](NodeId j) { second += hidden(j) / std::sqrt(dv * degree(j)); };
    add_term(v);
    for_each_neighbor(v, add_term);
    Eigen::RowVectorXd logits = second * params_.W1;
    logits.array() -= logits.maxCoeff();
    Eigen::RowVectorXd p = logits.array().exp().matrix();
    return p / p.sum();
  }

 private:
  bool flipped(NodeId a, NodeId b) const {
    for (const Flip& f : flips_)
      if ((f.edge.u == a && f.edge.v == b) || (f.edge.u == b && f.edge.v == a)) return true;
    return false;
  }

  double degree(NodeId a) const {
    int d = g_.degree(a) + 1;
    for (const Flip& f : flips_)
      if (f.edge.u == a || f.edge.v == a) d += f.op == FlipOp::add ? 1 : -1;
    return d;
  }

  template <typename F>
  void for_each_neighbor(NodeId a, F&& f) const {
    for (NodeId b : g_.neighbors(a))
      if (!flipped(a, b)) f(b);
    for (const Flip& fl : flips_) {
      if (fl.op != FlipOp::add) continue;
      if (fl.edge.u == a) f(fl.edge.v);
      else if (fl.edge.v == a) f(fl.edge.u);
    }
  }

  /// Activation of node j: sigma(row j of A_hat X W0), as a 1 x H vector.
  Eigen::RowVectorXd hidden(NodeId j) const {
    const double dj = degree(j);
    Eigen::RowVectorXd acc = projected_.row(j) / dj;
    for_each_neighbor(j, [&](NodeId k) { acc += projected_.row(k) / std::sqrt(dj * degree(k)); });
    if (params_.arch == Arch::relu) acc = acc.cwiseMax(0.0);
    return acc;
  }

  const ModelParams<double>& params_;
  const Graph& g_;
  const RowMatrix<double>& projected_;
  mutable std::span<const Flip> flips_;
};

Flip incident_flip(const Graph& g, NodeId v, NodeId u) {
  return {g.has_edge(v, u) ? FlipOp::del : FlipOp::add, make_edge(v, u)};
}

/// Pseudo-label probability minus the best other class; negative or a tie
/// lost to a lower class index means the argmax moved.
double signed_margin(const Eigen::RowVectorXd& p, int c) {
  const int r = runner_up_class(p, c);
  return r < 0 ? 1.0 : p(c) - p(r);
}

}  // namespace

std::vector<NodeId> vulnerable_oracle(const ModelParams<double>& surrogate, const GraphBundle& bundle, int budget,
                                      std::optional<std::span<const NodeId>> nodes) {
  if (budget != 1 && budget != 2) throw Error("vulnerable_oracle budget must be 1 or 2");
  const NodeId n = bundle.num_nodes();
  if (n > vulnerable_oracle_max_nodes)
    throw Error("vulnerability oracle is limited to " + std::to_string(vulnerable_oracle_max_nodes) +
                " nodes, graph has " + std::to_string(n));
  const RowMatrix<double> projected = project_features(surrogate, bundle.features);
  const Prediction<double> pred = forward_projected(surrogate, normalize_adjacency<double>(bundle.graph), projected);

  std::vector<NodeId> probe;
  if (nodes) {
    probe.assign(nodes->begin(), nodes->end());
  } else {
    for (NodeId v : bundle.test_idx)
      if (pred.pred[v] == bundle.labels[v]) probe.push_back(v);
  }
  std::sort(probe.begin(), probe.end());

  const LocalPredictor local(surrogate, bundle.graph, projected);
  std::vector<NodeId> out;
  for (NodeId v : probe) {
    const int c = pred.pred[v];
    bool hit = false;
    NodeId best_u = -1;
    double best_margin = INFINITY;
    for (NodeId u = 0; u < n && !hit; ++u) {
      if (u == v) continue;
      const Flip f = incident_flip(bundle.graph, v, u);
      const Eigen::RowVectorXd p = local.probs(v, std::span<const Flip>(&f, 1));
      if (argmax_row(p) != c) hit = true;
      const double m = signed_margin(p, c);
      if (m < best_margin) {
        best_margin = m;
        best_u = u;
      }
    }
    if (!hit && budget == 2 && best_u >= 0) {
      Flip seq[2] = {incident_flip(bundle.graph, v, best_u), {}};
      for (NodeId u = 0; u < n && !hit; ++u) {
        if (u == v || u == best_u) continue;
        seq[1] = incident_flip(bundle.graph, v, u);
        if (argmax_row(local.probs(v, seq)) != c) hit = true;
      }
    }
    if (hit) out.push_back(v);
  }
  return out;
}

HitStats hit_stats(const Perturbation& p, std::span<const NodeId> vulnerable) {
  const std::unordered_set<NodeId> vul(vulnerable.begin(), vulnerable.end());
  HitStats s;
  for (const Flip& f : p.flips) {
    const bool touches = vul.contains(f.edge.u) || vul.contains(f.edge.v);
    if (!touches) continue;
    if (f.op == FlipOp::add) ++s.hits;
    else ++s.vulnerable_deletions;
  }
  if (!p.flips.empty()) s.hit_rate = static_cast<double>(s.hits) / static_cast<double>(p.flips.size());
  if (p.budget > 0) s.hit_rate_budget = static_cast<double>(s.hits) / static_cast<double>(p.budget);
  return s;
}

double degree_distance(const Graph& a, const Graph& b) {
  if (a.num_nodes() != b.num_nodes()) throw Error("degree_distance needs graphs over the same node set");
  if (a.num_nodes() == 0) return 0.0;
  // Integer histogram differences keep the result exactly symmetric.
  std::map<int, long> diff;
  for (NodeId v = 0; v < a.num_nodes(); ++v) {
    ++diff[a.degree(v)];
    --diff[b.degree(v)];
  }
  long tv = 0;
  for (const auto& [deg, d] : diff) tv += std::abs(d);
  return 0.5 * static_cast<double>(tv) / a.num_nodes();
}

std::vector<NodeId> attacked_nodes(const GraphBundle& bundle, const Prediction<double>& clean,
                                   const Prediction<double>& attacked) {
  std::vector<NodeId> out;
  for (NodeId v : bundle.test_idx)
    if (clean.pred[v] == bundle.labels[v] && attacked.pred[v] != clean.pred[v]) out.push_back(v);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<RobustnessRow> export_robustness_dataset(const GraphBundle& bundle, const NodeStats& stats,
                                                     const Prediction<double>& pred,
                                                     std::span<const NodeId> attacked) {
  const std::unordered_set<NodeId> hit(attacked.begin(), attacked.end());
  std::vector<NodeId> test = bundle.test_idx;
  std::sort(test.begin(), test.end());
  std::vector<RobustnessRow> rows;
  for (NodeId v : test) {
    if (pred.pred[v] != bundle.labels[v]) continue;
    rows.push_back({v, stats.degree[v], stats.pagerank[v], stats.clustering[v], stats.eigencentrality[v],
                    classification_margin(pred, v), hit.contains(v)});
  }
  return rows;
}

std::string robustness_csv(std::span<const RobustnessRow> rows) {
  std::string out = "node,degree,pagerank,clustering,eigencentrality,margin,label\n";
  for (const RobustnessRow& r : rows) {
    out += std::to_string(r.node) + "," + std::to_string(r.degree) + "," + format_double(r.pagerank) + "," +
           format_double(r.clustering) + "," + format_double(r.eigencentrality) + "," + format_double(r.margin) +
           "," + (r.attacked ? "attacked" : "stable") + "\n";
  }
  return out;
}

}  // namespace pga
