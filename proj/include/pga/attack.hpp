#ifndef PGA_ATTACK_HPP
#define PGA_ATTACK_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pga/anchors.hpp"
#include "pga/selection.hpp"

namespace pga {

enum class Attacker { pga, random, dice, full_greedy };

std::string to_string(Attacker a);
Attacker parse_attacker(const std::string& s);

inline constexpr std::size_t unlimited = std::numeric_limits<std::size_t>::max();

struct AttackConfig {
  std::optional<double> budget_rate = 0.05;  // fraction of undirected edges
  std::optional<std::size_t> budget_abs;     // explicit flip count
  int greedy_step = 1;                       // flips per gradient pass
  SelectionConfig selection;
  std::optional<std::size_t> top_k;  // fake edges kept; default 10 * budget
  int removal_hops = 2;
  std::uint64_t seed = 0;
  Attacker attacker = Attacker::pga;

  void validate() const;
  /// floor(budget_rate * n_edges), or budget_abs.
  std::size_t budget(std::size_t n_edges) const;
  std::size_t effective_top_k(std::size_t budget) const;
};

struct IterationRecord {
  int t = 0;
  std::vector<Flip> flips;
  std::vector<double> scores;
  double loss_before = 0;
  double loss_after = 0;  // same still-correct mask as loss_before
  std::size_t negative_score_flips = 0;
};

struct AttackTrace {
  std::optional<TargetSet> targets;
  CandidatePools pools;
  std::vector<IterationRecord> iterations;
};

/// The greedy loop shared by PGA and full greedy: score the remaining
/// candidates on the current graph, flip the min(K, budget left) best ones
/// (ties in canonical edge order), drop them from the pool, repeat until the
/// budget or the pool is exhausted. Candidates that are edges of the current
/// graph are deleted, the others added.
Perturbation greedy_attack(const Graph& clean, const ModelParams<double>& surrogate,
                           const RowMatrix<double>& projected, const std::vector<int>& pseudo,
                           std::span<const NodeId> targets, std::vector<Edge> candidates, std::size_t budget,
                           int greedy_step, std::vector<IterationRecord>* log = nullptr);

/// Target selection, anchor pools on the clean graph, then the greedy loop
/// over the pooled candidates.
Perturbation run_pga(const GraphBundle& bundle, const ModelParams<double>& surrogate, const AttackConfig& cfg,
                     AttackTrace* trace = nullptr);

inline constexpr NodeId full_greedy_max_nodes = 2000;

/// The greedy loop with every unlabeled node as a target and every node pair
/// as a candidate.
Perturbation run_full_greedy(const GraphBundle& bundle, const ModelParams<double>& surrogate,
                             const AttackConfig& cfg, AttackTrace* trace = nullptr);

/// Uniform random flips: a fair coin picks add-a-non-edge or delete-an-edge.
Perturbation run_random(const GraphBundle& bundle, const AttackConfig& cfg);

/// True labels on the train split, surrogate predictions elsewhere.
std::vector<int> visible_labels(const GraphBundle& bundle, const Prediction<double>& surrogate_pred);

/// Delete same-label edges and connect different-label pairs, each with
/// probability one half, using `labels` (see visible_labels).
Perturbation run_dice(const GraphBundle& bundle, const AttackConfig& cfg, std::span<const int> labels);

}  // namespace pga

#endif  // PGA_ATTACK_HPP
