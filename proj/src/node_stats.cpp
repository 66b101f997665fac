#include "pga/node_stats.hpp"

#include <algorithm>
#include <cmath>

namespace pga {

Eigen::VectorXd pagerank(const Graph& g, const StatsOptions& o, bool* converged, int* iterations) {
  if (!(o.damping > 0 && o.damping < 1)) throw Error("damping must lie in (0, 1)");
  if (!(o.tol > 0)) throw Error("tol must be positive");
  const NodeId n = g.num_nodes();
  if (n == 0) return {};
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / n);
  Eigen::VectorXd next(n);
  bool done = false;
  int it = 0;
  while (it < o.max_iter && !done) {
    ++it;
    double dangling = 0;
    for (NodeId v = 0; v < n; ++v)
      if (g.degree(v) == 0) dangling += x[v];
    const double base = (1.0 - o.damping) / n + o.damping * dangling / n;
    for (NodeId v = 0; v < n; ++v) {
      double acc = 0;
      for (NodeId u : g.neighbors(v)) acc += x[u] / g.degree(u);
      next[v] = base + o.damping * acc;
    }
    done = (next - x).lpNorm<1>() < o.tol;
    x.swap(next);
  }
  x /= x.sum();
  if (converged) *converged = done;
  if (iterations) *iterations = it;
  return x;
}

Eigen::VectorXd clustering_coefficients(const Graph& g) {
  const NodeId n = g.num_nodes();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (NodeId v = 0; v < n; ++v) {
    const auto nv = g.neighbors(v);
    const double d = static_cast<double>(nv.size());
    if (nv.size() < 2) continue;
    // Each triangle through v is seen twice, once from each of its other corners.
    std::size_t twice_triangles = 0;
    for (NodeId u : nv) {
      const auto nu = g.neighbors(u);
      auto a = nv.begin();
      auto b = nu.begin();
      while (a != nv.end() && b != nu.end()) {
        if (*a < *b) ++a;
        else if (*b < *a) ++b;
        else {
          ++twice_triangles;
          ++a;
          ++b;
        }
      }
    }
    c[v] = static_cast<double>(twice_triangles) / (d * (d - 1));
  }
  return c;
}

Eigen::VectorXd eigenvector_centrality(const Graph& g, const StatsOptions& o, bool* converged, int* iterations) {
  const NodeId n = g.num_nodes();
  if (g.num_edges() == 0) {
    if (converged) *converged = true;
    if (iterations) *iterations = 0;
    return Eigen::VectorXd::Zero(n);
  }
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  Eigen::VectorXd next(n);
  bool done = false;
  int it = 0;
  while (it < o.max_iter && !done) {
    ++it;
    for (NodeId v = 0; v < n; ++v) {
      double acc = x[v];
      for (NodeId u : g.neighbors(v)) acc += x[u];
      next[v] = acc;
    }
    next.normalize();
    done = (next - x).lpNorm<1>() < o.tol;
    x.swap(next);
  }
  if (converged) *converged = done;
  if (iterations) *iterations = it;
  return x;
}

NodeStats compute_node_stats(const Graph& g, const StatsOptions& o) {
  NodeStats s;
  s.degree = g.degrees();
  s.pagerank = pagerank(g, o, &s.pagerank_converged, &s.pagerank_iterations);
  s.clustering = clustering_coefficients(g);
  s.eigencentrality = eigenvector_centrality(g, o, &s.eigencentrality_converged, &s.eigencentrality_iterations);
  s.margin = Eigen::VectorXd::Zero(g.num_nodes());
  return s;
}

}  // namespace pga
