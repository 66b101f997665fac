#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pga/gcn.hpp"
#include "pga/graph_io.hpp"
#include "pga/sbm.hpp"

using namespace pga;
namespace fs = std::filesystem;

namespace {

Graph path3() { return Graph::from_edges(3, std::vector<Edge>{{0, 1}, {1, 2}}); }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pga_test_graph_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

// Two-node directory with the given edges.tsv and labels.txt.
fs::path tiny_dir(const std::string& name, const std::string& edges, const std::string& labels = "0\n1\n") {
  const fs::path d = scratch(name);
  write(d / "graph.json", R"({"n_nodes": 2, "n_features": 1, "n_classes": 2})");
  write(d / "edges.tsv", edges);
  write(d / "features.csv", "1.0\n0.5\n");
  write(d / "labels.txt", labels);
  write(d / "splits.json", R"({"train": [0], "val": [], "test": [1]})");
  return d;
}

}  // namespace

TEST_CASE("make_edge canonicalizes and rejects self-loops") {
  CHECK(make_edge(3, 1) == Edge{1, 3});
  CHECK_THROWS_WITH_AS(make_edge(2, 2), doctest::Contains("self-loop"), Error);
}

TEST_CASE("from_edges symmetrizes and dedups") {
  const Graph g = Graph::from_edges(2, std::vector<Edge>{{0, 1}, {1, 0}});
  CHECK(g.num_edges() == 1);
  CHECK(g.degrees() == std::vector<int>{1, 1});
  CHECK(g.has_edge(1, 0));
  CHECK_THROWS_AS(Graph::from_edges(2, std::vector<Edge>{{0, 2}}), Error);
  CHECK_THROWS_AS(Graph::from_edges(2, std::vector<Edge>{{1, 1}}), Error);
}

TEST_CASE("normalize_adjacency hand computations") {
  SUBCASE("single edge") {
    const auto a = normalize_adjacency(Graph::from_edges(2, std::vector<Edge>{{0, 1}}));
    const Eigen::MatrixXd d(a.matrix);
    CHECK(d.isApprox(Eigen::MatrixXd::Constant(2, 2, 0.5)));
  }
  SUBCASE("isolated node") {
    const auto a = normalize_adjacency(Graph(1));
    CHECK(Eigen::MatrixXd(a.matrix)(0, 0) == 1.0);
  }
  SUBCASE("path") {
    const auto a = normalize_adjacency(path3());
    const Eigen::MatrixXd d(a.matrix);
    CHECK(d(0, 1) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-12));
    CHECK(d(0, 1) == doctest::Approx(0.40825).epsilon(1e-4));
    CHECK(d(0, 2) == 0.0);
    CHECK(d.isApprox(d.transpose()));
  }
}

TEST_CASE("k_hop_neighbors") {
  const Graph g = path3();
  const std::vector<NodeId> src{0};
  CHECK(k_hop_neighbors(g, src, 1) == std::vector<NodeId>{1});
  CHECK(k_hop_neighbors(g, src, 2) == std::vector<NodeId>{1, 2});
  const Graph iso = Graph::from_edges(3, std::vector<Edge>{{1, 2}});
  CHECK(k_hop_neighbors(iso, src, 5).empty());
  const std::vector<NodeId> bad{7};
  CHECK_THROWS_AS(k_hop_neighbors(g, bad, 1), Error);
  CHECK_THROWS_AS(k_hop_neighbors(g, src, 0), Error);
}

TEST_CASE("diameter and distances") {
  CHECK(diameter(path3()) == 2);
  CHECK(bfs_distances(Graph::from_edges(3, std::vector<Edge>{{0, 1}}), 0) == std::vector<int>{0, 1, -1});
}

TEST_CASE("apply_flip add, del and errors") {
  const Graph empty(2);
  const Graph one = apply_flip(empty, {0, 1}, FlipOp::add);
  CHECK(one.has_edge(0, 1));
  CHECK(one.degrees() == std::vector<int>{1, 1});
  CHECK(apply_flip(one, {0, 1}, FlipOp::del) == empty);
  CHECK_THROWS_WITH_AS(apply_flip(empty, {0, 0}, FlipOp::add), doctest::Contains("self-loop"), Error);
  CHECK_THROWS_WITH_AS(apply_flip(one, {0, 1}, FlipOp::add), doctest::Contains("existing"), Error);
  CHECK_THROWS_WITH_AS(apply_flip(empty, {0, 1}, FlipOp::del), doctest::Contains("non-edge"), Error);
}

TEST_CASE("apply_perturbation enforces budget and uniqueness") {
  const Graph g = path3();
  Perturbation p;
  p.base_edge_count = 2;
  p.budget = 1;
  p.flips = {{FlipOp::add, {0, 2}}, {FlipOp::del, {0, 1}}};
  CHECK_THROWS_AS(apply_perturbation(g, p), Error);
  p.budget = 2;
  const Graph out = apply_perturbation(g, p);
  CHECK(out.num_edges() == 2);
  CHECK(p.adds() == 1);
  CHECK(p.dels() == 1);
  p.flips = {{FlipOp::add, {0, 2}}, {FlipOp::del, {0, 2}}};
  CHECK_THROWS_AS(apply_perturbation(g, p), Error);
}

TEST_CASE("load_graph: smallest graph, dedup, validation errors") {
  const GraphBundle b = load_graph(tiny_dir("small", "0 1\n"));
  CHECK(b.graph.num_edges() == 1);
  CHECK(b.graph.degrees() == std::vector<int>{1, 1});
  CHECK(b.num_classes == 2);

  CHECK(load_graph(tiny_dir("dup", "0 1\n1 0\n")).graph.num_edges() == 1);
  CHECK_THROWS_WITH_AS(load_graph(tiny_dir("label", "0 1\n", "0\n2\n")), doctest::Contains("label out of range"),
                       Error);
  CHECK_THROWS_WITH_AS(load_graph(tiny_dir("rows", "0 1\n", "0\n")), doctest::Contains("rows"), Error);
  CHECK_THROWS_AS(load_graph(tiny_dir("loop", "1 1\n")), Error);

  const fs::path overlap = tiny_dir("overlap", "0 1\n");
  write(overlap / "splits.json", R"({"train": [0], "val": [0], "test": [1]})");
  CHECK_THROWS_WITH_AS(load_graph(overlap), doctest::Contains("overlapping"), Error);

  const fs::path missing = tiny_dir("missing", "0 1\n");
  fs::remove(missing / "labels.txt");
  CHECK_THROWS_WITH_AS(load_graph(missing), doctest::Contains("missing file"), Error);
}

TEST_CASE("save_graph round-trips exactly") {
  SbmOptions o;
  o.blocks = 2;
  o.block_size = 10;
  o.p_in = 0.5;
  o.feat_dim = 4;
  const GraphBundle b = generate_sbm(o);
  const fs::path d = scratch("roundtrip");
  save_graph(b, d);
  const GraphBundle r = load_graph(d);
  CHECK(r.graph == b.graph);
  CHECK(r.features == b.features);
  CHECK(r.labels == b.labels);
  CHECK(r.train_idx == b.train_idx);
  CHECK(r.val_idx == b.val_idx);
  CHECK(r.test_idx == b.test_idx);
}

TEST_CASE("perturbation file format") {
  Perturbation p;
  p.flips = {{FlipOp::add, {0, 2}}, {FlipOp::del, {1, 3}}};
  const std::string text = format_perturbation(p);
  CHECK(text == "add 0 2\ndel 1 3\n");
  const Perturbation q = parse_perturbation(text, 5);
  CHECK(q.flips == p.flips);
  CHECK(q.base_edge_count == 5);
  CHECK_THROWS_AS(parse_perturbation("flip 0 1\n", 1), Error);
  CHECK_THROWS_AS(parse_perturbation("add 0\n", 1), Error);
}

TEST_CASE("generate_sbm degenerate probabilities") {
  SbmOptions o;
  o.blocks = 2;
  o.block_size = 2;
  o.p_in = 1;
  o.p_out = 0;
  o.feat_dim = 2;
  o.split_fractions = {0.5, 0.25, 0.25};
  const GraphBundle b = generate_sbm(o);
  CHECK(b.graph.edges() == std::vector<Edge>{{0, 1}, {2, 3}});
  CHECK(b.labels == std::vector<int>{0, 0, 1, 1});
}

TEST_CASE("generate_sbm is deterministic and validates input") {
  SbmOptions o;
  o.block_size = 20;
  const GraphBundle a = generate_sbm(o), b = generate_sbm(o);
  CHECK(a.graph == b.graph);
  CHECK(a.features == b.features);
  CHECK(a.train_idx == b.train_idx);
  o.seed = 8;
  CHECK_FALSE(generate_sbm(o).graph == a.graph);

  SbmOptions zero;
  zero.block_size = 0;
  CHECK_THROWS_AS(generate_sbm(zero), Error);
  SbmOptions prob;
  prob.p_in = 1.5;
  CHECK_THROWS_AS(generate_sbm(prob), Error);
  SbmOptions split;
  split.split_fractions = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(generate_sbm(split), Error);
}

TEST_CASE("default SBM instance shape") {
  const GraphBundle b = generate_sbm({});
  CHECK(b.num_nodes() == 300);
  CHECK(b.num_classes == 3);
  CHECK(b.features.cols() == 12);
  CHECK(b.train_idx.size() + b.val_idx.size() + b.test_idx.size() == 300);
  CHECK_NOTHROW(b.validate());
}
