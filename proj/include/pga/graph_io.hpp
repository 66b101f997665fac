#ifndef PGA_GRAPH_IO_HPP
#define PGA_GRAPH_IO_HPP

#include <filesystem>
#include <string>

#include "pga/graph.hpp"

namespace pga {

/// Reads a graph directory: graph.json, edges.tsv, features.csv, labels.txt,
/// splits.json. Validates everything before returning.
GraphBundle load_graph(const std::filesystem::path& dir);

/// Writes the same layout; features are printed with 17 significant digits.
void save_graph(const GraphBundle& bundle, const std::filesystem::path& dir);

/// One flip per line: "add u v" or "del u v".
std::string format_perturbation(const Perturbation& p);
Perturbation parse_perturbation(const std::string& text, std::size_t base_edge_count);
void write_perturbation(const Perturbation& p, const std::filesystem::path& path);
Perturbation read_perturbation(const std::filesystem::path& path, std::size_t base_edge_count);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// %.17g formatting.
std::string format_double(double x);

}  // namespace pga

#endif  // PGA_GRAPH_IO_HPP
