#include "pga/selection.hpp"

#include <algorithm>
#include <cmath>

namespace pga {

void SelectionConfig::validate() const {
  if (!(filter_ratio > 0 && filter_ratio <= 1)) throw Error("filter_ratio must lie in (0, 1]");
  if (!(threshold_p >= 0)) throw Error("threshold_p must be non-negative");
}

double nearest_rank_quantile(std::vector<double> values, double ratio) {
  if (values.empty()) throw Error("quantile of an empty set");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(ratio * n - 1e-12));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

std::vector<NodeId> preprocessing_filter(const Prediction<double>& pred, std::span<const NodeId> unlabeled,
                                         double threshold_p) {
  std::vector<NodeId> out;
  for (NodeId v : unlabeled)
    if (classification_margin(pred, v) > threshold_p) out.push_back(v);
  return out;
}

std::vector<NodeId> quantile_filter(std::span<const NodeId> candidates, std::span<const double> values,
                                    double ratio) {
  if (candidates.empty()) return {};
  std::vector<double> vals;
  vals.reserve(candidates.size());
  for (NodeId v : candidates) vals.push_back(values[v]);
  const double threshold = nearest_rank_quantile(vals, ratio);
  std::vector<NodeId> out;
  for (NodeId v : candidates)
    if (values[v] < threshold) out.push_back(v);
  if (out.empty()) {
    const double lo = *std::min_element(vals.begin(), vals.end());
    for (NodeId v : candidates)
      if (values[v] == lo) out.push_back(v);
  }
  return out;
}

std::vector<NodeId> degree_filter(std::span<const NodeId> candidates, std::span<const int> degrees, double ratio) {
  const std::vector<double> values(degrees.begin(), degrees.end());
  return quantile_filter(candidates, values, ratio);
}

std::vector<NodeId> margin_filter(std::span<const NodeId> candidates, std::span<const double> margins,
                                  double ratio) {
  return quantile_filter(candidates, margins, ratio);
}

TargetSet select_targets(const Prediction<double>& pred, const GraphBundle& bundle, const SelectionConfig& cfg) {
  cfg.validate();
  const std::vector<NodeId> unlabeled = bundle.unlabeled();
  if (unlabeled.empty()) throw Error("no unlabeled nodes to select targets from");

  const NodeId n = bundle.num_nodes();
  std::vector<double> margins(static_cast<std::size_t>(n), 0.0);
  for (NodeId v : unlabeled) margins[v] = classification_margin(pred, v);
  const std::vector<int> degrees = bundle.graph.degrees();

  std::vector<NodeId> survivors = preprocessing_filter(pred, unlabeled, cfg.threshold_p);
  std::sort(survivors.begin(), survivors.end());
  const std::vector<NodeId> by_degree = degree_filter(survivors, degrees, cfg.filter_ratio);
  const std::vector<NodeId> by_margin = margin_filter(survivors, margins, cfg.filter_ratio);

  TargetSet t;
  t.config = cfg;
  std::set_intersection(by_degree.begin(), by_degree.end(), by_margin.begin(), by_margin.end(),
                        std::back_inserter(t.nodes));
  for (NodeId v : survivors) {
    t.provenance.push_back({v, margins[v], degrees[v], std::binary_search(by_degree.begin(), by_degree.end(), v),
                            std::binary_search(by_margin.begin(), by_margin.end(), v)});
  }
  if (t.nodes.empty())
    throw EmptyTargetSet("no attack targets survived selection (" + std::to_string(survivors.size()) +
                         " passed preprocessing); try a larger filter_ratio or smaller threshold_p");
  return t;
}

nlohmann::json to_json(const TargetSet& t) {
  nlohmann::json prov = nlohmann::json::array();
  for (const TargetRecord& r : t.provenance) {
    if (!(r.passed_degree && r.passed_margin)) continue;
    prov.push_back({{"id", r.id}, {"margin", r.margin}, {"degree", r.degree}});
  }
  return {{"targets", t.nodes},
          {"provenance", prov},
          {"config", {{"threshold_p", t.config.threshold_p}, {"filter_ratio", t.config.filter_ratio}}}};
}

}  // namespace pga
