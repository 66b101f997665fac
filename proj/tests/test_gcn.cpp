#include <doctest.h>

#include "pga/attack_objective.hpp"
#include "pga/sbm.hpp"
#include "pga/train.hpp"
#include "support/fixtures.hpp"

using namespace pga;
using namespace pga::testing;

TEST_CASE("forward: zero logits give a uniform row") {
  ModelParams<double> p;
  p.hidden = 1;
  p.W0 = Eigen::MatrixXd::Ones(1, 1);
  p.W1 = Eigen::MatrixXd::Zero(1, 2);
  const Prediction<double> pred = forward(p, Graph(1), Eigen::MatrixXd(Eigen::MatrixXd::Ones(1, 1)));
  CHECK(pred.probs(0, 0) == 0.5);
  CHECK(pred.probs(0, 1) == 0.5);
  CHECK(pred.pred[0] == 0);
}

TEST_CASE("forward: shape errors and divergence") {
  std::mt19937_64 gen(1);
  const ModelParams<double> p = random_params(3, 4, 2, Arch::relu, gen);
  CHECK_THROWS_AS(forward(p, Graph(5), Eigen::MatrixXd(Eigen::MatrixXd::Ones(5, 2))), Error);
  CHECK_THROWS_AS(forward(p, Graph(4), Eigen::MatrixXd(Eigen::MatrixXd::Ones(5, 3))), Error);
  ModelParams<double> bad = p;
  bad.W1(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(forward(bad, Graph(5), Eigen::MatrixXd(Eigen::MatrixXd::Ones(5, 3))), Error);
}

TEST_CASE("linear forward matches the dense oracle softmax(A^2 X W0 W1)") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 10; ++trial) {
    const NodeId n = 10 + 4 * trial;
    const Graph g = oracle::random_graph(n, 0.15, gen);
    const Eigen::MatrixXd x = random_matrix(n, 5, gen);
    const ModelParams<double> p = random_params(5, 6, 3, Arch::linear, gen);
    const Prediction<double> pred = forward(p, g, x);
    const oracle::Dense ah = oracle::renormalize(oracle::adjacency(g));
    const oracle::Dense ref = oracle::softmax(oracle::matmul(
        oracle::matmul(ah, ah), oracle::matmul(oracle::to_dense(x), oracle::matmul(oracle::to_dense(p.W0),
                                                                                   oracle::to_dense(p.W1)))));
    double worst = 0;
    for (NodeId i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(pred.probs(i, c) - static_cast<double>(ref[i][c])));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("linear and relu agree when hidden preactivations are nonnegative") {
  std::mt19937_64 gen(2);
  const Graph g = oracle::random_graph(12, 0.3, gen);
  const Eigen::MatrixXd x = random_matrix(12, 4, gen).cwiseAbs();
  ModelParams<double> lin = random_params(4, 5, 3, Arch::linear, gen);
  lin.W0 = lin.W0.cwiseAbs();
  ModelParams<double> relu = lin;
  relu.arch = Arch::relu;
  CHECK(forward(lin, g, x).probs == forward(relu, g, x).probs);
}

TEST_CASE("rows are stochastic and eval forward is bitwise pure") {
  std::mt19937_64 gen(4);
  const Graph g = oracle::random_graph(30, 0.1, gen);
  const Eigen::MatrixXd x = random_matrix(30, 6, gen);
  const ModelParams<double> p = random_params(6, 8, 4, Arch::relu, gen, 2.0);
  const Prediction<double> a = forward(p, g, x), b = forward(p, g, x);
  CHECK(a.probs == b.probs);
  CHECK((a.probs.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-6);
}

TEST_CASE("train-mode dropout is seeded") {
  std::mt19937_64 gen(4);
  const Graph g = oracle::random_graph(20, 0.2, gen);
  const Eigen::MatrixXd x = random_matrix(20, 6, gen);
  const ModelParams<double> p = random_params(6, 8, 3, Arch::relu, gen);
  const auto adj = normalize_adjacency(g);
  const ForwardMode m1{true, 0.5, 1}, m2{true, 0.5, 2};
  CHECK(forward(p, adj, x, m1).probs == forward(p, adj, x, m1).probs);
  CHECK_FALSE(forward(p, adj, x, m1).probs == forward(p, adj, x, m2).probs);
  CHECK(forward(p, adj, x, ForwardMode{false, 0.5, 1}).probs == forward(p, adj, x).probs);
}

TEST_CASE("parameter gradients match central differences") {
  std::mt19937_64 gen(21);
  const double h = 1e-4;
  for (Arch arch : {Arch::linear, Arch::relu}) {
    for (int trial = 0; trial < 5; ++trial) {
      const GraphBundle b = random_bundle(12, 4, 3, 0.25, gen);
      const ModelParams<double> p = random_params(4, 5, 3, arch, gen);
      const auto adj = normalize_adjacency(b.graph);
      const ParamGradients<double> g = cross_entropy_gradients(p, adj, b.features, b.labels, b.train_idx);
      const oracle::Dense a = oracle::adjacency(b.graph), x = oracle::to_dense(b.features);
      auto loss = [&](const Eigen::MatrixXd& w0, const Eigen::MatrixXd& w1) {
        return oracle::cross_entropy(
            oracle::forward(a, x, oracle::to_dense(w0), oracle::to_dense(w1), arch == Arch::relu), b.labels,
            b.train_idx);
      };
      CHECK(std::abs(static_cast<double>(loss(p.W0, p.W1)) - g.loss) < 1e-12);
      double worst = 0;
      for (Eigen::Index i = 0; i < p.W0.size(); ++i) {
        Eigen::MatrixXd up = p.W0, dn = p.W0;
        up.data()[i] += h;
        dn.data()[i] -= h;
        const double fd = static_cast<double>((loss(up, p.W1) - loss(dn, p.W1)) / (2 * h));
        worst = std::max(worst, relative_error(g.dW0.data()[i], fd));
      }
      for (Eigen::Index i = 0; i < p.W1.size(); ++i) {
        Eigen::MatrixXd up = p.W1, dn = p.W1;
        up.data()[i] += h;
        dn.data()[i] -= h;
        const double fd = static_cast<double>((loss(p.W0, up) - loss(p.W0, dn)) / (2 * h));
        worst = std::max(worst, relative_error(g.dW1.data()[i], fd));
      }
      CHECK(worst < 1e-4);
    }
  }
}

TEST_CASE("edge gradients match central differences through the renormalization") {
  std::mt19937_64 gen(31);
  for (Arch arch : {Arch::linear, Arch::relu}) {
    for (int trial = 0; trial < 4; ++trial) {
      const NodeId n = 12;
      const Graph g = oracle::random_graph(n, 0.3, gen);
      const Eigen::MatrixXd x = random_matrix(n, 4, gen);
      const ModelParams<double> p = random_params(4, 5, 3, arch, gen);
      const Prediction<double> pred = forward(p, g, x);
      std::vector<int> pseudo = pred.pred;
      pseudo[0] = (pseudo[0] + 1) % 3;  // one target starts outside the still-correct set
      const std::vector<NodeId> targets{0, 3, 5, 8};
      const PseudoLabelState state{pseudo, {}};
      std::vector<Edge> cands;
      for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v) cands.push_back({u, v});
      const std::vector<double> s = edge_gradients(p, g, x, state, targets, cands);
      const oracle::Dense a = oracle::adjacency(g);
      double worst = 0;
      int adds = 0, dels = 0;
      for (std::size_t i = 0; i < cands.size(); ++i) {
        const double fd = static_cast<double>(oracle::edge_fd(a, oracle::to_dense(x), oracle::to_dense(p.W0),
                                                              oracle::to_dense(p.W1), arch == Arch::relu, pseudo,
                                                              targets, cands[i]));
        worst = std::max(worst, relative_error(s[i], fd));
        (g.has_edge(cands[i]) ? dels : adds)++;
      }
      CHECK(adds > 0);
      CHECK(dels > 0);
      CHECK(worst < 1e-3);
    }
  }
}

TEST_CASE("edge gradients: locality, canonicalization, self-loops") {
  // Two components; candidates inside the far component cannot reach the target.
  const Graph g = Graph::from_edges(
      10, std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}, {5, 6}, {6, 7}, {7, 8}, {8, 9}});
  std::mt19937_64 gen(3);
  const Eigen::MatrixXd x = random_matrix(10, 3, gen);
  const ModelParams<double> p = random_params(3, 4, 2, Arch::linear, gen);
  const PseudoLabelState state{forward(p, g, x).pred, {}};
  const std::vector<NodeId> targets{0};
  const std::vector<Edge> far{{6, 8}, {7, 9}, {5, 9}};
  for (double s : edge_gradients(p, g, x, state, targets, far)) CHECK(std::abs(s) < 1e-9);
  const std::vector<Edge> fwd{{0, 2}}, rev{{2, 0}};
  CHECK(edge_gradients(p, g, x, state, targets, fwd) == edge_gradients(p, g, x, state, targets, rev));
  const std::vector<Edge> loop{{4, 4}};
  CHECK_THROWS_AS(edge_gradients(p, g, x, state, targets, loop), Error);
}

TEST_CASE("attack loss examples") {
  auto single = [](double p0) {
    Prediction<double> pred;
    pred.probs.resize(1, 2);
    pred.probs << p0, 1 - p0;
    pred.pred = {argmax_row(pred.probs.row(0))};
    return pred;
  };
  const std::vector<NodeId> t{0};
  SUBCASE("confident") {
    const auto pred = single(1 - 1e-12);
    const auto s = PseudoLabelState::from_prediction(pred, t);
    CHECK(attack_loss(pred, s, t) == doctest::Approx(-0.76159).epsilon(1e-5));
  }
  SUBCASE("tie resolves to class 0") {
    const auto pred = single(0.5);
    const auto s = PseudoLabelState::from_prediction(pred, t);
    CHECK(s.still_correct.size() == 1);
    CHECK(attack_loss(pred, s, t) == doctest::Approx(0.69315).epsilon(1e-5));
  }
  SUBCASE("already flipped") {
    const auto pred = single(0.3);
    PseudoLabelState s{{0}, {}};
    s.refresh(pred, t);
    CHECK(s.still_correct.empty());
    CHECK(attack_loss(pred, s, t) == doctest::Approx(std::tanh(0.4)));
  }
  SUBCASE("strictly increases as the pseudo-label probability drops") {
    double prev = -10;
    for (double p0 = 0.99; p0 > 0.51; p0 -= 0.02) {
      Prediction<double> pred;
      pred.probs.resize(1, 3);
      pred.probs << p0, (1 - p0) * 0.7, (1 - p0) * 0.3;
      pred.pred = {0};
      const auto s = PseudoLabelState::from_prediction(pred, t);
      const double l = attack_loss(pred, s, t);
      CHECK(l > prev);
      prev = l;
    }
  }
}

TEST_CASE("accuracy") {
  Prediction<double> pred;
  pred.pred = {0, 1, 1};
  const std::vector<int> labels{0, 1, 0};
  const std::vector<NodeId> right{0, 1}, wrong{2}, none;
  CHECK(accuracy(pred, labels, right) == 1.0);
  CHECK(accuracy(pred, labels, wrong) == 0.0);
  CHECK_THROWS_AS(accuracy(pred, labels, none), Error);
}

TEST_CASE("training on the default SBM instance") {
  const GraphBundle b = generate_sbm({});
  TrainConfig cfg;
  TrainHistory hist;
  const ModelParams<double> p = train(b, Arch::relu, cfg, &hist);
  const double acc = accuracy(forward(p, b.graph, b.features), b.labels, b.test_idx);
  CHECK(acc >= 0.90);
  REQUIRE(hist.train_loss.size() > 10);
  CHECK(hist.train_loss[10] < hist.train_loss[0]);
  CHECK(hist.best_epoch >= 0);
  CHECK(hist.epochs_run <= cfg.epochs);

  const ModelParams<double> again = train(b, Arch::relu, cfg);
  CHECK(again.W0 == p.W0);
  CHECK(again.W1 == p.W1);
}

TEST_CASE("training config and split validation") {
  const GraphBundle b = generate_sbm({});
  TrainConfig cfg;
  cfg.lr = 0;
  CHECK_THROWS_AS(train(b, Arch::linear, cfg), Error);
  cfg = {};
  cfg.dropout = 1.0;
  CHECK_THROWS_AS(train(b, Arch::linear, cfg), Error);
  cfg = {};
  cfg.patience = cfg.epochs + 1;
  CHECK_THROWS_AS(train(b, Arch::linear, cfg), Error);
  GraphBundle no_val = b;
  no_val.val_idx.clear();
  CHECK_THROWS_AS(train(no_val, Arch::linear, TrainConfig{}), Error);
  cfg = {};
  cfg.lr = 1e200;
  CHECK_THROWS_AS(train(b, Arch::relu, cfg), Error);
}
