#ifndef PGA_ANCHORS_HPP
#define PGA_ANCHORS_HPP

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "pga/attack_objective.hpp"

namespace pga {

struct CandidatePools {
  std::vector<NodeId> add_anchors;
  std::vector<NodeId> rem_anchors;
  std::vector<Edge> add_edges;  // non-edges of the clean graph, by descending clean score
  std::vector<Edge> rem_edges;  // existing edges incident to targets, canonical order
  std::size_t pruned_from = 0;  // fake-edge count before the top-k cut
};

class NoAddCandidates : public Error {
 public:
  using Error::Error;
};

/// Runner-up class of v's prediction (lowest index on ties).
int second_class(const Prediction<double>& pred, NodeId v);

/// Nodes whose predicted class is v's runner-up class.
std::vector<NodeId> second_class_set(const Prediction<double>& pred, NodeId v);

/// A fake edge and the anchor endpoint(s) that produced it.
struct FakeEdge {
  Edge edge;
  bool u_is_anchor = false;
  bool v_is_anchor = false;
};

/// Pairs each target with every node of its second prediction category,
/// skipping existing edges and self-pairs. Sorted canonically, deduplicated.
std::vector<FakeEdge> fake_edges(const Prediction<double>& pred, std::span<const NodeId> targets, const Graph& g);

struct AddPool {
  std::vector<NodeId> anchors;
  std::vector<Edge> edges;
  std::vector<double> scores;
  std::size_t pruned_from = 0;
};

/// One gradient pass over the fake edges on the clean graph, keeping the
/// top_k by score (ties in canonical edge order). Throws NoAddCandidates when
/// there are no fake edges at all.
AddPool build_add_pool(const Prediction<double>& pred, std::span<const NodeId> targets, const GraphBundle& bundle,
                       const ModelParams<double>& params, const PseudoLabelState& state, std::size_t top_k);

struct RemovePool {
  std::vector<NodeId> anchors;
  std::vector<Edge> edges;
};

/// k-hop anchors around the targets and the existing edges joining a target
/// to an anchor or to another target.
RemovePool build_remove_pool(const Graph& g, std::span<const NodeId> targets, int hops);

/// Both pools; a missing add side leaves the add pool empty.
CandidatePools build_pools(const Prediction<double>& pred, std::span<const NodeId> targets, const GraphBundle& bundle,
                           const ModelParams<double>& params, const PseudoLabelState& state, std::size_t top_k,
                           int hops);

nlohmann::json to_json(const CandidatePools& pools);

}  // namespace pga

#endif  // PGA_ANCHORS_HPP
