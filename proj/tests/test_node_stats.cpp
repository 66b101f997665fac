#include <doctest.h>

#include "pga/node_stats.hpp"
#include "support/oracles.hpp"

using namespace pga;

namespace {

// Solves x = d P x + (1 - d)/n + d (dangling mass)/n as a dense linear system.
Eigen::VectorXd pagerank_solve(const Graph& g, double d) {
  const NodeId n = g.num_nodes();
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  for (NodeId j = 0; j < n; ++j) {
    if (g.degree(j) == 0) {
      m.col(j).array() -= d / n;
      continue;
    }
    for (NodeId i : g.neighbors(j)) m(i, j) -= d / g.degree(j);
  }
  return m.partialPivLu().solve(Eigen::VectorXd::Constant(n, (1 - d) / n));
}

}  // namespace

TEST_CASE("triangle statistics") {
  const Graph k3 = Graph::from_edges(3, std::vector<Edge>{{0, 1}, {1, 2}, {0, 2}});
  const NodeStats s = compute_node_stats(k3);
  for (int v = 0; v < 3; ++v) {
    CHECK(s.pagerank[v] == doctest::Approx(1.0 / 3).epsilon(1e-10));
    CHECK(s.clustering[v] == 1.0);
    CHECK(s.eigencentrality[v] == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-8));
  }
  CHECK(s.converged());
}

TEST_CASE("star has no triangles") {
  const Graph star = Graph::from_edges(4, std::vector<Edge>{{0, 1}, {0, 2}, {0, 3}});
  const Eigen::VectorXd c = clustering_coefficients(star);
  CHECK(c.isZero());
}

TEST_CASE("pagerank on a 3-path matches a dense linear solve") {
  const Graph p = Graph::from_edges(3, std::vector<Edge>{{0, 1}, {1, 2}});
  const Eigen::VectorXd pr = pagerank(p, {});
  CHECK((pr - pagerank_solve(p, 0.85)).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("pagerank with dangling nodes matches a dense linear solve") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph g = oracle::random_graph(15, 0.15, gen);
    const Eigen::VectorXd pr = pagerank(g, {});
    CHECK((pr - pagerank_solve(g, 0.85)).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK(pr.sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("clustering coefficient by hand") {
  // Node 0 has neighbors 1, 2, 3 with one edge among them (1-2): 2*1/(3*2).
  const Graph g = Graph::from_edges(4, std::vector<Edge>{{0, 1}, {0, 2}, {0, 3}, {1, 2}});
  const Eigen::VectorXd c = clustering_coefficients(g);
  CHECK(c[0] == doctest::Approx(1.0 / 3));
  CHECK(c[1] == 1.0);
  CHECK(c[3] == 0.0);
}

TEST_CASE("eigenvector centrality edge cases") {
  CHECK(eigenvector_centrality(Graph(4), {}).isZero());
  std::mt19937_64 gen(5);
  const Graph g = oracle::random_graph(20, 0.3, gen);
  const Eigen::VectorXd e = eigenvector_centrality(g, {});
  CHECK(e.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.minCoeff() >= 0.0);
}

TEST_CASE("non-convergence is flagged, not thrown") {
  const Graph p = Graph::from_edges(3, std::vector<Edge>{{0, 1}, {1, 2}});
  StatsOptions o;
  o.max_iter = 1;
  bool converged = true;
  int iters = 0;
  const Eigen::VectorXd pr = pagerank(p, o, &converged, &iters);
  CHECK_FALSE(converged);
  CHECK(iters == 1);
  CHECK(pr.size() == 3);
  o = {};
  o.damping = 1.0;
  CHECK_THROWS_AS(pagerank(p, o), Error);
  o = {};
  o.tol = 0;
  CHECK_THROWS_AS(pagerank(p, o), Error);
}
