#ifndef PGA_EVALUATION_HPP
#define PGA_EVALUATION_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pga/gcn.hpp"
#include "pga/node_stats.hpp"
#include "pga/train.hpp"

namespace pga {

struct AttackReport {
  std::string mode = "evasion";  // or "poisoning"
  double clean_accuracy = 0;
  double attacked_accuracy = 0;
  std::size_t budget = 0;
  std::size_t flips_applied = 0;
  std::size_t adds = 0;
  std::size_t dels = 0;
  std::size_t negative_score_flips = 0;
  double hit_rate = 0;         // additions touching vulnerable nodes / flips applied
  double hit_rate_budget = 0;  // same numerator over the budget
  std::size_t vulnerable_deletions = 0;
  double degree_distance = 0;
  double runtime_ms = 0;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();

  double accuracy_drop() const { return clean_accuracy - attacked_accuracy; }
};

nlohmann::json to_json(const AttackReport& r);

/// Fixed victim, clean vs perturbed adjacency, test-split accuracy.
AttackReport evaluate_evasion(const ModelParams<double>& victim, const GraphBundle& bundle,
                              const Perturbation& perturbation);

/// Victims trained from scratch with `cfg` on the clean and on the perturbed
/// graph; reports both test accuracies.
AttackReport evaluate_poisoning(const GraphBundle& bundle, const Perturbation& perturbation, Arch arch,
                                const TrainConfig& cfg);

inline constexpr NodeId vulnerable_oracle_max_nodes = 5000;

/// Nodes whose surrogate prediction changes under at most `budget` flips of
/// edges incident to the node: exhaustive single flips, plus for budget 2 all
/// second flips after the single flip that most reduces the margin. Probes
/// the correctly classified test nodes unless `nodes` is given.
std::vector<NodeId> vulnerable_oracle(const ModelParams<double>& surrogate, const GraphBundle& bundle, int budget,
                                      std::optional<std::span<const NodeId>> nodes = std::nullopt);

struct HitStats {
  double hit_rate = 0;
  double hit_rate_budget = 0;
  std::size_t hits = 0;
  std::size_t vulnerable_deletions = 0;
};

HitStats hit_stats(const Perturbation& p, std::span<const NodeId> vulnerable);
inline double hit_rate(const Perturbation& p, std::span<const NodeId> vulnerable) {
  return hit_stats(p, vulnerable).hit_rate;
}

/// Total-variation distance between the two empirical degree distributions.
double degree_distance(const Graph& a, const Graph& b);

/// Correctly classified test nodes whose prediction differs after the attack.
std::vector<NodeId> attacked_nodes(const GraphBundle& bundle, const Prediction<double>& clean,
                                   const Prediction<double>& attacked);

struct RobustnessRow {
  NodeId node = 0;
  int degree = 0;
  double pagerank = 0;
  double clustering = 0;
  double eigencentrality = 0;
  double margin = 0;
  bool attacked = false;
};

/// One row per correctly classified test node.
std::vector<RobustnessRow> export_robustness_dataset(const GraphBundle& bundle, const NodeStats& stats,
                                                     const Prediction<double>& pred,
                                                     std::span<const NodeId> attacked);

/// Header "node,degree,pagerank,clustering,eigencentrality,margin,label".
std::string robustness_csv(std::span<const RobustnessRow> rows);

}  // namespace pga

#endif  // PGA_EVALUATION_HPP
