#ifndef PGA_PARAMS_IO_HPP
#define PGA_PARAMS_IO_HPP

#include <filesystem>
#include <string>

#include "pga/gcn.hpp"

namespace pga {

/// {"arch", "hidden", "W0", "W1", "seed"} with 17-significant-digit floats.
std::string params_to_json(const ModelParams<double>& p);
ModelParams<double> params_from_json(const std::string& text);

void save_params(const ModelParams<double>& p, const std::filesystem::path& path);
ModelParams<double> load_params(const std::filesystem::path& path);

}  // namespace pga

#endif  // PGA_PARAMS_IO_HPP
