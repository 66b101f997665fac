#ifndef PGA_NODE_STATS_HPP
#define PGA_NODE_STATS_HPP

#include <vector>

#include <Eigen/Dense>

#include "pga/graph.hpp"

namespace pga {

struct StatsOptions {
  double damping = 0.85;
  double tol = 1e-8;
  int max_iter = 1000;
};

struct NodeStats {
  std::vector<int> degree;
  Eigen::VectorXd pagerank;
  Eigen::VectorXd clustering;
  Eigen::VectorXd eigencentrality;
  Eigen::VectorXd margin;  // filled by the caller from a prediction
  bool pagerank_converged = false;
  bool eigencentrality_converged = false;
  int pagerank_iterations = 0;
  int eigencentrality_iterations = 0;

  bool converged() const { return pagerank_converged && eigencentrality_converged; }
};

/// PageRank with uniform teleport and dangling mass spread uniformly.
Eigen::VectorXd pagerank(const Graph& g, const StatsOptions& opts, bool* converged = nullptr, int* iterations = nullptr);

/// 2 * triangles(v) / (deg(v) * (deg(v) - 1)); zero below degree 2.
Eigen::VectorXd clustering_coefficients(const Graph& g);

/// Leading eigenvector of A by power iteration on A + I, unit 2-norm.
/// Returns the zero vector for a graph with no edges.
Eigen::VectorXd eigenvector_centrality(const Graph& g, const StatsOptions& opts, bool* converged = nullptr,
                                       int* iterations = nullptr);

/// Non-convergence is reported through the flags; the last iterate is kept.
NodeStats compute_node_stats(const Graph& g, const StatsOptions& opts = {});
inline NodeStats compute_node_stats(const GraphBundle& b, const StatsOptions& opts = {}) {
  return compute_node_stats(b.graph, opts);
}

}  // namespace pga

#endif  // PGA_NODE_STATS_HPP
