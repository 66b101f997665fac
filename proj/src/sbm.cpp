#include "pga/sbm.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pga {

void SbmOptions::validate() const {
  if (blocks < 1 || block_size < 1) throw Error("SBM needs at least one node (blocks and block_size >= 1)");
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(std::string(name) + " must lie in [0, 1]");
  };
  prob(p_in, "p_in");
  prob(p_out, "p_out");
  if (feat_dim < blocks) throw Error("feat_dim must be at least the number of blocks");
  if (!(feat_noise >= 0)) throw Error("feat_noise must be non-negative");
  double sum = 0;
  for (double f : split_fractions) {
    if (!(f > 0)) throw Error("split fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error("split fractions must sum to 1");
}

GraphBundle generate_sbm(const SbmOptions& o) {
  o.validate();
  const NodeId n = static_cast<NodeId>(o.blocks) * o.block_size;
  std::mt19937_64 gen(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  GraphBundle b;
  b.num_classes = o.blocks;
  b.labels.resize(static_cast<std::size_t>(n));
  for (NodeId v = 0; v < n; ++v) b.labels[v] = v / o.block_size;

  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v) {
      const double p = b.labels[u] == b.labels[v] ? o.p_in : o.p_out;
      if (unit(gen) < p) edges.push_back({u, v});
    }
  b.graph = Graph::from_edges(n, edges);

  const int width = o.feat_dim / o.blocks;
  std::normal_distribution<double> noise(0.0, o.feat_noise);
  b.features.resize(n, o.feat_dim);
  for (NodeId v = 0; v < n; ++v)
    for (int k = 0; k < o.feat_dim; ++k) {
      const bool on = k / width == b.labels[v] && k < width * o.blocks;
      b.features(v, k) = (on ? o.centroid_scale : 0.0) + (o.feat_noise > 0 ? noise(gen) : 0.0);
    }

  for (int c = 0; c < o.blocks; ++c) {
    std::vector<NodeId> members;
    for (NodeId v = c * o.block_size; v < (c + 1) * o.block_size; ++v) members.push_back(v);
    std::shuffle(members.begin(), members.end(), gen);
    const auto m = static_cast<double>(members.size());
    const auto n_train = static_cast<std::size_t>(std::lround(o.split_fractions[0] * m));
    const auto n_val = std::min(members.size() - n_train,
                                static_cast<std::size_t>(std::lround(o.split_fractions[1] * m)));
    for (std::size_t i = 0; i < members.size(); ++i) {
      auto& dst = i < n_train ? b.train_idx : (i < n_train + n_val ? b.val_idx : b.test_idx);
      dst.push_back(members[i]);
    }
  }
  std::sort(b.train_idx.begin(), b.train_idx.end());
  std::sort(b.val_idx.begin(), b.val_idx.end());
  std::sort(b.test_idx.begin(), b.test_idx.end());
  b.validate();
  return b;
}

}  // namespace pga
