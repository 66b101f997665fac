#include "pga/train.hpp"

#include <cmath>
#include <random>

namespace pga {

void TrainConfig::validate() const {
  if (!(lr > 0)) throw Error("lr must be positive");
  if (weight_decay < 0) throw Error("weight_decay must be non-negative");
  if (epochs < 1) throw Error("epochs must be positive");
  if (patience < 0 || patience > epochs) throw Error("patience must lie in [0, epochs]");
  if (hidden < 1) throw Error("hidden must be positive");
  if (!(dropout >= 0 && dropout < 1)) throw Error("dropout must lie in [0, 1)");
}

ModelParams<double> glorot_init(int n_features, int hidden, int n_classes, Arch arch, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto fill = [&](int rows, int cols) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix<double> w(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) w(i, j) = dist(gen);
    return w;
  };
  ModelParams<double> p;
  p.arch = arch;
  p.hidden = hidden;
  p.seed = seed;
  p.W0 = fill(n_features, hidden);
  p.W1 = fill(hidden, n_classes);
  return p;
}

namespace {

struct AdamState {
  Matrix<double> m;
  Matrix<double> v;

  explicit AdamState(const Matrix<double>& like)
      : m(Matrix<double>::Zero(like.rows(), like.cols())), v(Matrix<double>::Zero(like.rows(), like.cols())) {}

  void step(Matrix<double>& w, const Matrix<double>& grad, const TrainConfig& cfg, int t) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    m = beta1 * m + (1 - beta1) * grad;
    v = beta2 * v + (1 - beta2) * grad.cwiseAbs2();
    const double c1 = 1 - std::pow(beta1, t);
    const double c2 = 1 - std::pow(beta2, t);
    w.array() -= cfg.lr * ((m.array() / c1) / ((v.array() / c2).sqrt() + eps) + cfg.weight_decay * w.array());
  }
};

double mean_cross_entropy(const Prediction<double>& pred, std::span<const int> labels, std::span<const NodeId> idx) {
  double loss = 0;
  for (NodeId v : idx) loss -= std::log(pred.probs(v, labels[v]));
  return loss / static_cast<double>(idx.size());
}

}  // namespace

ModelParams<double> train(const GraphBundle& bundle, Arch arch, const TrainConfig& cfg, TrainHistory* history) {
  cfg.validate();
  if (bundle.train_idx.empty()) throw Error("empty train split");
  if (bundle.val_idx.empty()) throw Error("empty validation split");

  const NormalizedAdjacency<double> adj = normalize_adjacency<double>(bundle.graph);
  const Matrix<double>& x = bundle.features;
  std::mt19937_64 gen(cfg.seed);
  ModelParams<double> params =
      glorot_init(static_cast<int>(x.cols()), cfg.hidden, bundle.num_classes, arch, gen());
  params.seed = cfg.seed;

  AdamState adam0(params.W0), adam1(params.W1);
  ModelParams<double> best = params;
  double best_acc = -1, best_loss = INFINITY;
  int since_best = 0;
  TrainHistory local;
  TrainHistory& h = history ? *history : local;
  h = {};

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const ForwardMode mode{true, cfg.dropout, gen()};
    const ParamGradients<double> g =
        cross_entropy_gradients(params, adj, x, bundle.labels, bundle.train_idx, mode);
    if (!std::isfinite(g.loss) || !g.dW0.allFinite() || !g.dW1.allFinite())
      throw Error("training diverged at epoch " + std::to_string(epoch));
    h.train_loss.push_back(g.loss);
    adam0.step(params.W0, g.dW0, cfg, epoch + 1);
    adam1.step(params.W1, g.dW1, cfg, epoch + 1);

    const Prediction<double> pred = forward(params, adj, x);
    const double acc = accuracy(pred, bundle.labels, bundle.val_idx);
    const double loss = mean_cross_entropy(pred, bundle.labels, bundle.val_idx);
    if (!std::isfinite(loss)) throw Error("validation loss diverged at epoch " + std::to_string(epoch));
    h.val_accuracy.push_back(acc);
    h.val_loss.push_back(loss);
    h.epochs_run = epoch + 1;

    if (acc > best_acc || (acc == best_acc && loss < best_loss)) {
      best_acc = acc;
      best_loss = loss;
      best = params;
      h.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  return best;
}

}  // namespace pga
