#ifndef PGA_TRAIN_HPP
#define PGA_TRAIN_HPP

#include <cstdint>
#include <vector>

#include "pga/gcn.hpp"

namespace pga {

/// Defaults follow the usual two-layer GCN recipe: Adam at lr 0.01, weight
/// decay 5e-4, 200 epochs, patience 30, 16 hidden units, dropout 0.5.
struct TrainConfig {
  double lr = 0.01;
  double weight_decay = 5e-4;
  int epochs = 200;
  int patience = 30;
  int hidden = 16;
  double dropout = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainHistory {
  std::vector<double> train_loss;  // train-mode loss before each update
  std::vector<double> val_accuracy;
  std::vector<double> val_loss;
  int best_epoch = -1;
  int epochs_run = 0;
};

/// Uniform Glorot initialization.
ModelParams<double> glorot_init(int n_features, int hidden, int n_classes, Arch arch, std::uint64_t seed);

/// Full-batch training on the train split with early stopping on validation
/// accuracy (ties broken by lower validation loss). Deterministic in cfg.seed.
ModelParams<double> train(const GraphBundle& bundle, Arch arch, const TrainConfig& cfg,
                          TrainHistory* history = nullptr);

}  // namespace pga

#endif  // PGA_TRAIN_HPP
