#include "pga/graph_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pga {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error("malformed JSON in " + path.string() + ": " + e.what());
  }
}

std::vector<NodeId> read_index_list(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(std::string("splits.json lacks \"") + key + "\"");
  std::vector<NodeId> out;
  for (const auto& v : j.at(key)) out.push_back(v.get<NodeId>());
  return out;
}

}  // namespace

GraphBundle load_graph(const fs::path& dir) {
  const json meta = read_json(dir / "graph.json");
  const NodeId n = meta.at("n_nodes").get<NodeId>();
  const int d = meta.at("n_features").get<int>();
  const int c = meta.at("n_classes").get<int>();
  if (n <= 0) throw Error("graph.json: n_nodes must be positive");

  std::vector<Edge> edges;
  {
    std::istringstream in(read_file(dir / "edges.tsv"));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::istringstream ls(line);
      long long a = 0, b = 0;
      if (!(ls >> a >> b)) throw Error("edges.tsv line " + std::to_string(lineno) + ": expected two integers");
      if (a < 0 || b < 0 || a >= n || b >= n)
        throw Error("edges.tsv line " + std::to_string(lineno) + ": node id out of range");
      if (a == b) throw Error("edges.tsv line " + std::to_string(lineno) + ": self-loop");
      edges.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b)});
    }
  }

  GraphBundle b;
  b.graph = Graph::from_edges(n, edges);
  b.num_classes = c;

  {
    std::istringstream in(read_file(dir / "features.csv"));
    std::string line;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::vector<double> row;
      std::istringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) {
        try {
          row.push_back(std::stod(cell));
        } catch (const std::exception&) {
          throw Error("features.csv row " + std::to_string(rows.size()) + ": bad number '" + cell + "'");
        }
      }
      if (static_cast<int>(row.size()) != d)
        throw Error("features.csv row " + std::to_string(rows.size()) + " has " + std::to_string(row.size()) +
                    " columns, expected " + std::to_string(d));
      rows.push_back(std::move(row));
    }
    if (static_cast<NodeId>(rows.size()) != n)
      throw Error("features.csv has " + std::to_string(rows.size()) + " rows, expected " + std::to_string(n));
    b.features.resize(n, d);
    for (NodeId i = 0; i < n; ++i)
      for (int k = 0; k < d; ++k) b.features(i, k) = rows[i][k];
  }

  {
    std::istringstream in(read_file(dir / "labels.txt"));
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      b.labels.push_back(std::stoi(line));
    }
    if (static_cast<NodeId>(b.labels.size()) != n)
      throw Error("labels.txt has " + std::to_string(b.labels.size()) + " rows, expected " + std::to_string(n));
  }

  const json splits = read_json(dir / "splits.json");
  b.train_idx = read_index_list(splits, "train");
  b.val_idx = read_index_list(splits, "val");
  b.test_idx = read_index_list(splits, "test");
  b.validate();
  return b;
}

void save_graph(const GraphBundle& b, const fs::path& dir) {
  b.validate();
  fs::create_directories(dir);
  json meta = {{"n_nodes", b.num_nodes()}, {"n_features", b.features.cols()}, {"n_classes", b.num_classes}};
  write_file_atomic(dir / "graph.json", meta.dump() + "\n");

  std::string edges;
  for (const Edge& e : b.graph.edges()) edges += std::to_string(e.u) + "\t" + std::to_string(e.v) + "\n";
  write_file_atomic(dir / "edges.tsv", edges);

  std::string feats;
  for (Eigen::Index i = 0; i < b.features.rows(); ++i) {
    for (Eigen::Index k = 0; k < b.features.cols(); ++k) {
      if (k) feats += ',';
      feats += format_double(b.features(i, k));
    }
    feats += '\n';
  }
  write_file_atomic(dir / "features.csv", feats);

  std::string labels;
  for (int y : b.labels) labels += std::to_string(y) + "\n";
  write_file_atomic(dir / "labels.txt", labels);

  json splits = {{"train", b.train_idx}, {"val", b.val_idx}, {"test", b.test_idx}};
  write_file_atomic(dir / "splits.json", splits.dump() + "\n");
}

std::string format_perturbation(const Perturbation& p) {
  std::string out;
  for (const Flip& f : p.flips)
    out += std::string(f.op == FlipOp::add ? "add " : "del ") + std::to_string(f.edge.u) + " " +
           std::to_string(f.edge.v) + "\n";
  return out;
}

Perturbation parse_perturbation(const std::string& text, std::size_t base_edge_count) {
  Perturbation p;
  p.base_edge_count = base_edge_count;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string op;
    long long u = 0, v = 0;
    if (!(ls >> op >> u >> v) || (op != "add" && op != "del"))
      throw Error("perturbation line " + std::to_string(lineno) + ": expected 'add u v' or 'del u v'");
    p.flips.push_back({op == "add" ? FlipOp::add : FlipOp::del,
                       make_edge(static_cast<NodeId>(u), static_cast<NodeId>(v))});
  }
  p.budget = p.flips.size();
  return p;
}

void write_perturbation(const Perturbation& p, const fs::path& path) {
  write_file_atomic(path, format_perturbation(p));
}

Perturbation read_perturbation(const fs::path& path, std::size_t base_edge_count) {
  return parse_perturbation(read_file(path), base_edge_count);
}

}  // namespace pga
