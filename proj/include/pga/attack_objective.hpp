#ifndef PGA_ATTACK_OBJECTIVE_HPP
#define PGA_ATTACK_OBJECTIVE_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "pga/gcn.hpp"

namespace pga {

/// Pseudo-labels frozen at attack start and the targets still predicted as
/// their pseudo-label under the current adjacency.
struct PseudoLabelState {
  std::vector<int> pseudo;
  std::vector<NodeId> still_correct;

  template <typename Scalar>
  static PseudoLabelState from_prediction(const Prediction<Scalar>& pred, std::span<const NodeId> targets) {
    PseudoLabelState s{pred.pred, {}};
    s.refresh(pred, targets);
    return s;
  }

  template <typename Scalar>
  void refresh(const Prediction<Scalar>& pred, std::span<const NodeId> targets) {
    still_correct.clear();
    for (NodeId v : targets)
      if (pred.pred[v] == pseudo[v]) still_correct.push_back(v);
  }
};

/// Sum of tanh(runner-up minus pseudo-label probability) over targets plus
/// the mean negative log pseudo-label probability over still-correct targets.
/// The attacker ascends this value.
template <typename Scalar>
Scalar attack_loss(const Prediction<Scalar>& pred, const PseudoLabelState& state, std::span<const NodeId> targets) {
  using std::log;
  using std::tanh;
  Scalar total = 0;
  for (NodeId v : targets) {
    const int c = state.pseudo[v];
    const int r = runner_up_class(pred.probs.row(v), c);
    if (r >= 0) total += tanh(pred.probs(v, r) - pred.probs(v, c));
  }
  if (!state.still_correct.empty()) {
    Scalar ce = 0;
    for (NodeId v : state.still_correct) ce -= log(pred.probs(v, state.pseudo[v]));
    total += ce / Scalar(state.still_correct.size());
  }
  return total;
}

/// Edge-flip scores on a fixed adjacency.
///
/// Holds a low-rank factorization of dL/dA_hat,
///   G(i, j) = grad_logits(i) . second_input(j) + grad_pre(i) . projected(j),
/// plus the per-node degree terms, so one score costs O(H + C) after an
/// O((N + E)(H + C)) setup. Scores differentiate through the full
/// renormalization, including the D~^{-1/2} factors.
///
/// The scorer keeps a reference to `graph`; the graph must outlive it.
template <typename Scalar = double>
class EdgeScorer {
 public:
  EdgeScorer(const ModelParams<Scalar>& params, const Graph& graph, const RowMatrix<Scalar>& projected,
             const std::vector<int>& pseudo, std::span<const NodeId> targets)
      : graph_(graph), projected_(projected) {
    if (projected.rows() != graph.num_nodes()) throw Error("projected features do not match the graph");
    if (targets.empty()) throw Error("attack loss needs at least one target");
    const NormalizedAdjacency<Scalar> adj = normalize_adjacency<Scalar>(graph);
    degree_ = adj.degree;

    const RowMatrix<Scalar> pre = adj.matrix * projected_;
    const bool relu = params.arch == Arch::relu;
    const RowMatrix<Scalar> hidden = relu ? RowMatrix<Scalar>(pre.cwiseMax(Scalar(0))) : pre;
    second_input_ = hidden * params.W1;
    const RowMatrix<Scalar> logits = adj.matrix * second_input_;
    if (!logits.allFinite()) throw Error("non-finite logits (diverged parameters?)");
    prediction_ = make_prediction<Scalar>(softmax_rows<Scalar>(logits));
    state_.pseudo = pseudo;
    state_.refresh(prediction_, targets);
    loss_ = attack_loss(prediction_, state_, targets);

    // dL/dZ for each target row, then through the row softmax.
    const Eigen::Index n_classes = prediction_.probs.cols();
    grad_logits_ = RowMatrix<Scalar>::Zero(prediction_.probs.rows(), n_classes);
    const Scalar ce_weight = state_.still_correct.empty() ? Scalar(0) : Scalar(1) / Scalar(state_.still_correct.size());
    std::vector<char> correct(static_cast<std::size_t>(graph.num_nodes()), 0);
    for (NodeId v : state_.still_correct) correct[v] = 1;
    Vector<Scalar> dz(n_classes);
    for (NodeId v : targets) {
      const auto z = prediction_.probs.row(v);
      const int c = pseudo[v];
      const int r = runner_up_class(z, c);
      dz.setZero();
      if (r >= 0) {
        const Scalar th = std::tanh(z(r) - z(c));
        const Scalar w = Scalar(1) - th * th;
        dz(r) += w;
        dz(c) -= w;
      }
      if (correct[v]) dz(c) -= ce_weight / z(c);
      const Scalar inner = z.dot(dz.transpose());
      for (Eigen::Index k = 0; k < n_classes; ++k) grad_logits_(v, k) += z(k) * (dz(k) - inner);
    }

    const RowMatrix<Scalar> grad_second = adj.matrix * grad_logits_;
    grad_pre_ = grad_second * params.W1.transpose();
    if (relu) grad_pre_ = grad_pre_.cwiseProduct((pre.array() > Scalar(0)).template cast<Scalar>().matrix());

    // row_term_(u) = sum over nonzeros j of row u: A_hat(u,j) (G(u,j) + G(j,u)).
    row_term_ = Vector<Scalar>::Zero(graph.num_nodes());
    for (NodeId u = 0; u < graph.num_nodes(); ++u) {
      Scalar acc = 0;
      for (typename SparseMatrix<Scalar>::InnerIterator it(adj.matrix, u); it; ++it) {
        const NodeId j = static_cast<NodeId>(it.col());
        acc += it.value() * (factor(u, j) + factor(j, u));
      }
      row_term_[u] = acc;
    }
  }

  const Prediction<Scalar>& prediction() const { return prediction_; }
  const PseudoLabelState& state() const { return state_; }
  Scalar loss() const { return loss_; }

  /// dL/dA_uv + dL/dA_vu, moving both symmetric entries together.
  Scalar symmetric_gradient(Edge e) const {
    const NodeId u = e.u, v = e.v;
    if (u == v) throw Error("self-loop candidate " + std::to_string(u));
    const std::size_t n = static_cast<std::size_t>(graph_.num_nodes());
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n)
      throw Error("candidate endpoint out of range");
    using std::sqrt;
    return (factor(u, v) + factor(v, u)) / sqrt(degree_[u] * degree_[v]) - row_term_[u] / (Scalar(2) * degree_[u]) -
           row_term_[v] / (Scalar(2) * degree_[v]);
  }

  /// Flip-oriented score: positive means flipping e raises the attack loss.
  Scalar score(Edge e) const {
    const Scalar sign = graph_.has_edge(e.u, e.v) ? Scalar(-1) : Scalar(1);
    return sign * symmetric_gradient(e);
  }

  std::vector<Scalar> scores(std::span<const Edge> candidates) const {
    std::vector<Scalar> out(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) out[i] = score(candidates[i]);
    return out;
  }

 private:
  Scalar factor(NodeId i, NodeId j) const {
    return grad_logits_.row(i).dot(second_input_.row(j)) + grad_pre_.row(i).dot(projected_.row(j));
  }

  const Graph& graph_;
  RowMatrix<Scalar> projected_;
  RowMatrix<Scalar> second_input_;
  RowMatrix<Scalar> grad_logits_;
  RowMatrix<Scalar> grad_pre_;
  Vector<Scalar> degree_;
  Vector<Scalar> row_term_;
  Prediction<Scalar> prediction_;
  PseudoLabelState state_;
  Scalar loss_ = 0;
};

template <typename Scalar>
RowMatrix<Scalar> project_features(const ModelParams<Scalar>& params, const Matrix<Scalar>& x) {
  if (params.W0.rows() != x.cols()) throw Error("feature dimension does not match W0");
  return x * params.W0;
}

/// Flip scores for `candidates`, aligned by index. Evaluated in eval mode at
/// `graph`; the still-correct set is refreshed from that evaluation.
template <typename Scalar>
std::vector<Scalar> edge_gradients(const ModelParams<Scalar>& params, const Graph& graph, const Matrix<Scalar>& x,
                                   const PseudoLabelState& state, std::span<const NodeId> targets,
                                   std::span<const Edge> candidates) {
  for (const Edge& e : candidates)
    if (e.u == e.v) throw Error("self-loop candidate " + std::to_string(e.u));
  std::vector<Edge> canon;
  canon.reserve(candidates.size());
  for (const Edge& e : candidates) canon.push_back(make_edge(e.u, e.v));
  const EdgeScorer<Scalar> scorer(params, graph, project_features(params, x), state.pseudo, targets);
  return scorer.scores(canon);
}

}  // namespace pga

#endif  // PGA_ATTACK_OBJECTIVE_HPP
