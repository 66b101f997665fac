#ifndef PGA_TOOLS_COMMANDS_HPP
#define PGA_TOOLS_COMMANDS_HPP

#include <string>
#include <vector>

#include <json.hpp>

namespace pga::cli {

enum ExitCode : int { ok = 0, failure = 1, usage = 2 };

/// Every key the commands understand, with its default.
nlohmann::json default_config();

/// Defaults, overlaid by the config file, overlaid by `--key value` pairs.
/// Keys are dotted paths ("attack.filter_ratio") or one of the short
/// aliases (--out, --blocks, --seed, ...).
nlohmann::json resolve_config(const std::string& command, const std::string& config_path,
                              const std::vector<std::string>& overrides);

/// `args` excludes the program name: {"attack", "--config", "run.json", ...}.
int run(const std::vector<std::string>& args);

}  // namespace pga::cli

#endif  // PGA_TOOLS_COMMANDS_HPP
