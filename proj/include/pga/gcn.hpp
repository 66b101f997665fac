#ifndef PGA_GCN_HPP
#define PGA_GCN_HPP

// Two-layer graph convolution: forward pass, parameter gradients of the
// training loss, and prediction utilities. Everything is templated on the
// scalar type so oracles can run the same model in extended precision.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "pga/graph.hpp"

namespace pga {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

/// D~^{-1/2} (A + I) D~^{-1/2} with the self-loop degrees d~ kept alongside.
template <typename Scalar = double>
struct NormalizedAdjacency {
  SparseMatrix<Scalar> matrix;
  Vector<Scalar> degree;
};

template <typename Scalar = double>
NormalizedAdjacency<Scalar> normalize_adjacency(const Graph& g) {
  const NodeId n = g.num_nodes();
  NormalizedAdjacency<Scalar> out;
  out.degree.resize(n);
  for (NodeId v = 0; v < n; ++v) out.degree[v] = Scalar(g.degree(v) + 1);
  Vector<Scalar> inv_sqrt = out.degree.cwiseSqrt().cwiseInverse();

  out.matrix.resize(n, n);
  Eigen::VectorXi nnz(n);
  for (NodeId v = 0; v < n; ++v) nnz[v] = g.degree(v) + 1;
  out.matrix.reserve(nnz);
  for (NodeId i = 0; i < n; ++i) {
    bool diag_done = false;
    for (NodeId j : g.neighbors(i)) {
      if (!diag_done && j > i) {
        out.matrix.insert(i, i) = inv_sqrt[i] * inv_sqrt[i];
        diag_done = true;
      }
      out.matrix.insert(i, j) = inv_sqrt[i] * inv_sqrt[j];
    }
    if (!diag_done) out.matrix.insert(i, i) = inv_sqrt[i] * inv_sqrt[i];
  }
  out.matrix.makeCompressed();
  return out;
}

enum class Arch { linear, relu };

inline std::string to_string(Arch a) { return a == Arch::linear ? "linear" : "relu"; }
inline Arch parse_arch(const std::string& s) {
  if (s == "linear") return Arch::linear;
  if (s == "relu") return Arch::relu;
  throw Error("unknown arch '" + s + "' (expected linear or relu)");
}

template <typename Scalar = double>
struct ModelParams {
  Arch arch = Arch::linear;
  int hidden = 0;
  Matrix<Scalar> W0;  // D x H
  Matrix<Scalar> W1;  // H x C
  std::uint64_t seed = 0;

  int num_features() const { return static_cast<int>(W0.rows()); }
  int num_classes() const { return static_cast<int>(W1.cols()); }

  template <typename Other>
  ModelParams<Other> cast() const {
    return {arch, hidden, W0.template cast<Other>(), W1.template cast<Other>(), seed};
  }
};

template <typename Scalar = double>
struct Prediction {
  RowMatrix<Scalar> probs;  // N x C, row-stochastic
  std::vector<int> pred;

  int num_classes() const { return static_cast<int>(probs.cols()); }
};

/// Index of the largest entry; the lowest index wins ties.
template <typename Derived>
int argmax_row(const Eigen::MatrixBase<Derived>& row) {
  int best = 0;
  for (int c = 1; c < row.size(); ++c)
    if (row(c) > row(best)) best = c;
  return best;
}

/// Largest entry other than `excluded`; the lowest index wins ties.
template <typename Derived>
int runner_up_class(const Eigen::MatrixBase<Derived>& row, int excluded) {
  int best = -1;
  for (int c = 0; c < row.size(); ++c) {
    if (c == excluded) continue;
    if (best < 0 || row(c) > row(best)) best = c;
  }
  return best;
}

template <typename Scalar>
RowMatrix<Scalar> softmax_rows(const RowMatrix<Scalar>& logits) {
  RowMatrix<Scalar> out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const Scalar m = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - m).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

template <typename Scalar>
Prediction<Scalar> make_prediction(RowMatrix<Scalar> probs) {
  Prediction<Scalar> p;
  p.pred.resize(static_cast<std::size_t>(probs.rows()));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) p.pred[i] = argmax_row(probs.row(i));
  p.probs = std::move(probs);
  return p;
}

struct ForwardMode {
  bool train = false;
  double dropout = 0.0;
  std::uint64_t seed = 0;
};

/// Intermediates of one forward pass, kept for backpropagation.
template <typename Scalar>
struct ForwardTrace {
  Matrix<Scalar> input;          // X after dropout
  RowMatrix<Scalar> projected;   // X W0
  RowMatrix<Scalar> pre;         // A_hat X W0
  RowMatrix<Scalar> hidden;      // activation after dropout
  Matrix<Scalar> hidden_mask;    // scaled keep mask, empty when dropout is off
  RowMatrix<Scalar> logits;
  RowMatrix<Scalar> probs;
};

template <typename Scalar>
void check_shapes(const ModelParams<Scalar>& params, const SparseMatrix<Scalar>& adj, const Matrix<Scalar>& x) {
  if (adj.rows() != x.rows() || adj.cols() != x.rows())
    throw Error("adjacency is " + std::to_string(adj.rows()) + "x" + std::to_string(adj.cols()) +
                " but features have " + std::to_string(x.rows()) + " rows");
  if (params.W0.rows() != x.cols())
    throw Error("W0 expects " + std::to_string(params.W0.rows()) + " features, got " + std::to_string(x.cols()));
  if (params.W1.rows() != params.W0.cols()) throw Error("W0/W1 hidden dimension mismatch");
  if (params.W1.cols() < 1) throw Error("model has no classes");
}

template <typename Scalar>
Matrix<Scalar> dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::mt19937_64& gen) {
  std::bernoulli_distribution keep(1.0 - rate);
  const Scalar scale = Scalar(1.0 / (1.0 - rate));
  Matrix<Scalar> mask(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) mask(i, j) = keep(gen) ? scale : Scalar(0);
  return mask;
}

template <typename Scalar>
ForwardTrace<Scalar> forward_trace(const ModelParams<Scalar>& params, const NormalizedAdjacency<Scalar>& adj,
                                   const Matrix<Scalar>& x, const ForwardMode& mode = {}) {
  check_shapes(params, adj.matrix, x);
  ForwardTrace<Scalar> t;
  const bool drop = mode.train && mode.dropout > 0.0;
  std::mt19937_64 gen(mode.seed);
  if (drop) {
    t.input = x.cwiseProduct(dropout_mask<Scalar>(x.rows(), x.cols(), mode.dropout, gen));
  } else {
    t.input = x;
  }
  t.projected = t.input * params.W0;
  t.pre = adj.matrix * t.projected;
  t.hidden = params.arch == Arch::relu ? RowMatrix<Scalar>(t.pre.cwiseMax(Scalar(0))) : t.pre;
  if (drop) {
    t.hidden_mask = dropout_mask<Scalar>(t.hidden.rows(), t.hidden.cols(), mode.dropout, gen);
    t.hidden = t.hidden.cwiseProduct(t.hidden_mask);
  }
  t.logits = adj.matrix * (t.hidden * params.W1);
  if (!t.logits.allFinite()) throw Error("non-finite logits (diverged parameters?)");
  t.probs = softmax_rows<Scalar>(t.logits);
  return t;
}

template <typename Scalar>
Prediction<Scalar> forward(const ModelParams<Scalar>& params, const NormalizedAdjacency<Scalar>& adj,
                           const Matrix<Scalar>& x, const ForwardMode& mode = {}) {
  return make_prediction<Scalar>(forward_trace(params, adj, x, mode).probs);
}

template <typename Scalar>
Prediction<Scalar> forward(const ModelParams<Scalar>& params, const Graph& g, const Matrix<Scalar>& x) {
  return forward(params, normalize_adjacency<Scalar>(g), x);
}

/// Eval-mode forward from precomputed X W0 (independent of the adjacency).
template <typename Scalar>
Prediction<Scalar> forward_projected(const ModelParams<Scalar>& params, const NormalizedAdjacency<Scalar>& adj,
                                     const RowMatrix<Scalar>& projected) {
  RowMatrix<Scalar> h = adj.matrix * projected;
  if (params.arch == Arch::relu) h = h.cwiseMax(Scalar(0));
  RowMatrix<Scalar> logits = adj.matrix * (h * params.W1);
  if (!logits.allFinite()) throw Error("non-finite logits (diverged parameters?)");
  return make_prediction<Scalar>(softmax_rows<Scalar>(logits));
}

template <typename Scalar>
struct ParamGradients {
  Scalar loss = 0;
  Matrix<Scalar> dW0;
  Matrix<Scalar> dW1;
};

/// Mean cross-entropy over `idx` and its gradients w.r.t. W0 and W1.
template <typename Scalar>
ParamGradients<Scalar> cross_entropy_gradients(const ModelParams<Scalar>& params,
                                               const NormalizedAdjacency<Scalar>& adj, const Matrix<Scalar>& x,
                                               std::span<const int> labels, std::span<const NodeId> idx,
                                               const ForwardMode& mode = {}) {
  if (idx.empty()) throw Error("cross-entropy over an empty index set");
  const ForwardTrace<Scalar> t = forward_trace(params, adj, x, mode);
  const Scalar inv_n = Scalar(1) / Scalar(idx.size());

  ParamGradients<Scalar> g;
  RowMatrix<Scalar> grad_logits = RowMatrix<Scalar>::Zero(t.probs.rows(), t.probs.cols());
  for (NodeId v : idx) {
    const int y = labels[v];
    g.loss -= std::log(t.probs(v, y)) * inv_n;
    grad_logits.row(v) = t.probs.row(v) * inv_n;
    grad_logits(v, y) -= inv_n;
  }
  // logits = A (H W1): dH W1-side = A^T dlogits, and A is symmetric.
  const RowMatrix<Scalar> grad_m = adj.matrix * grad_logits;
  g.dW1 = t.hidden.transpose() * grad_m;
  RowMatrix<Scalar> grad_hidden = grad_m * params.W1.transpose();
  if (t.hidden_mask.size() > 0) grad_hidden = grad_hidden.cwiseProduct(t.hidden_mask);
  if (params.arch == Arch::relu)
    grad_hidden = grad_hidden.cwiseProduct((t.pre.array() > Scalar(0)).template cast<Scalar>().matrix());
  const RowMatrix<Scalar> grad_projected = adj.matrix * grad_hidden;
  g.dW0 = t.input.transpose() * grad_projected;
  return g;
}

template <typename Scalar>
double accuracy(const Prediction<Scalar>& pred, std::span<const int> labels, std::span<const NodeId> idx) {
  if (idx.empty()) throw Error("accuracy over an empty index set");
  std::size_t hits = 0;
  for (NodeId v : idx) hits += pred.pred[v] == labels[v];
  return static_cast<double>(hits) / static_cast<double>(idx.size());
}

}  // namespace pga

#endif  // PGA_GCN_HPP
