#ifndef PGA_TESTS_FIXTURES_HPP
#define PGA_TESTS_FIXTURES_HPP

#include <algorithm>
#include <numeric>
#include <random>

#include "pga/gcn.hpp"
#include "support/oracles.hpp"

namespace pga::testing {

inline Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = n(gen);
  return m;
}

inline ModelParams<double> random_params(int d, int h, int c, Arch arch, std::mt19937_64& gen, double scale = 1.0) {
  ModelParams<double> p;
  p.arch = arch;
  p.hidden = h;
  p.W0 = random_matrix(d, h, gen, scale);
  p.W1 = random_matrix(h, c, gen, scale);
  return p;
}

/// Random attributed graph with every node labeled by a random class and a
/// shuffled split of roughly 30/20/50.
inline GraphBundle random_bundle(NodeId n, int d, int c, double density, std::mt19937_64& gen) {
  GraphBundle b;
  b.graph = oracle::random_graph(n, density, gen);
  b.features = random_matrix(n, d, gen);
  b.num_classes = c;
  std::uniform_int_distribution<int> cls(0, c - 1);
  b.labels.resize(static_cast<std::size_t>(n));
  for (int& y : b.labels) y = cls(gen);
  std::vector<NodeId> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), gen);
  const auto n_train = std::max<std::size_t>(1, order.size() * 3 / 10);
  const auto n_val = std::max<std::size_t>(1, order.size() / 5);
  b.train_idx.assign(order.begin(), order.begin() + n_train);
  b.val_idx.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  b.test_idx.assign(order.begin() + n_train + n_val, order.end());
  for (auto* s : {&b.train_idx, &b.val_idx, &b.test_idx}) std::sort(s->begin(), s->end());
  return b;
}

/// |a - f| / max(|a|, |f|), or the absolute gap when both are below `floor`.
inline double relative_error(double analytic, double reference, double floor = 1e-7) {
  const double scale = std::max(std::abs(analytic), std::abs(reference));
  const double gap = std::abs(analytic - reference);
  return scale < floor ? gap : gap / scale;
}

}  // namespace pga::testing

#endif  // PGA_TESTS_FIXTURES_HPP
