#include "pga/params_io.hpp"

#include <json.hpp>

#include "pga/graph_io.hpp"

namespace pga {

namespace {

void append_matrix(std::string& out, const Matrix<double>& m) {
  out += '[';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i) out += ',';
    out += '[';
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += ']';
  }
  out += ']';
}

Matrix<double> read_matrix(const nlohmann::json& j, const char* name) {
  if (!j.is_array()) throw Error(std::string(name) + " must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Matrix<double> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols) throw Error(std::string(name) + " has ragged rows");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  if (!m.allFinite()) throw Error(std::string(name) + " has non-finite entries");
  return m;
}

}  // namespace

std::string params_to_json(const ModelParams<double>& p) {
  std::string out = "{\"arch\":\"" + to_string(p.arch) + "\",\"hidden\":" + std::to_string(p.hidden) + ",\"W0\":";
  append_matrix(out, p.W0);
  out += ",\"W1\":";
  append_matrix(out, p.W1);
  out += ",\"seed\":" + std::to_string(p.seed) + "}\n";
  return out;
}

ModelParams<double> params_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed params JSON: ") + e.what());
  }
  ModelParams<double> p;
  p.arch = parse_arch(j.at("arch").get<std::string>());
  p.hidden = j.at("hidden").get<int>();
  p.W0 = read_matrix(j.at("W0"), "W0");
  p.W1 = read_matrix(j.at("W1"), "W1");
  p.seed = j.value("seed", std::uint64_t{0});
  if (p.W0.cols() != p.hidden || p.W1.rows() != p.hidden) throw Error("params shapes disagree with hidden size");
  return p;
}

void save_params(const ModelParams<double>& p, const std::filesystem::path& path) {
  write_file_atomic(path, params_to_json(p));
}

ModelParams<double> load_params(const std::filesystem::path& path) { return params_from_json(read_file(path)); }

}  // namespace pga
