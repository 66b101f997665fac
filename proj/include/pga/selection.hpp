#ifndef PGA_SELECTION_HPP
#define PGA_SELECTION_HPP

#include <span>
#include <vector>

#include <json.hpp>

#include "pga/gcn.hpp"

namespace pga {

struct SelectionConfig {
  double threshold_p = 0.05;  // preprocessing cutoff on probability margins
  double filter_ratio = 0.65;  // shared nearest-rank quantile for degree and margin

  void validate() const;
};

struct TargetRecord {
  NodeId id = 0;
  double margin = 0;
  int degree = 0;
  bool passed_degree = false;
  bool passed_margin = false;
};

struct TargetSet {
  std::vector<NodeId> nodes;  // ascending
  /// One record per preprocessing survivor; targets passed both filters.
  std::vector<TargetRecord> provenance;
  SelectionConfig config;
};

class EmptyTargetSet : public Error {
 public:
  using Error::Error;
};

/// Gap between the two largest class probabilities of v (always >= 0).
template <typename Scalar>
double classification_margin(const Prediction<Scalar>& pred, NodeId v) {
  if (pred.num_classes() < 2) return 1.0;
  const auto row = pred.probs.row(v);
  const int top = argmax_row(row);
  return static_cast<double>(row(top) - row(runner_up_class(row, top)));
}

/// Nearest-rank quantile: the ceil(ratio * n)-th smallest value.
double nearest_rank_quantile(std::vector<double> values, double ratio);

/// Keeps nodes with margin strictly above threshold_p.
std::vector<NodeId> preprocessing_filter(const Prediction<double>& pred, std::span<const NodeId> unlabeled,
                                         double threshold_p);

/// Keeps candidates whose value is strictly below the ratio-quantile of the
/// candidates' values; falls back to the minimum-valued ties when that is
/// empty. `values` is indexed by node id.
std::vector<NodeId> quantile_filter(std::span<const NodeId> candidates, std::span<const double> values,
                                    double ratio);

std::vector<NodeId> degree_filter(std::span<const NodeId> candidates, std::span<const int> degrees, double ratio);
std::vector<NodeId> margin_filter(std::span<const NodeId> candidates, std::span<const double> margins,
                                  double ratio);

/// Intersection of the degree and margin filters over the preprocessing
/// survivors of the unlabeled nodes. Throws EmptyTargetSet when empty.
TargetSet select_targets(const Prediction<double>& pred, const GraphBundle& bundle, const SelectionConfig& cfg);

nlohmann::json to_json(const TargetSet& t);

}  // namespace pga

#endif  // PGA_SELECTION_HPP
