#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "udrl/envs/env.hpp"

namespace udrl::envs {

// Names accepted by make_environment.
const std::vector<std::string>& environment_names();

struct EnvConfig {
  std::string name = "grid_world";
  std::string params_json = "{}";  // JSON object of world parameters
  std::string world_file;          // optional map file (grid worlds only)

  bool operator==(const EnvConfig&) const = default;
};

// World file: rows of map characters, a line holding exactly "---", then an
// optional JSON parameter object. Keys given in the file are overridden by
// keys in params_json. Throws ConfigError naming the offending field.
std::unique_ptr<Environment> make_environment(const EnvConfig& config);

struct WorldFile {
  std::vector<std::string> rows;
  std::string params_json;
};

WorldFile read_world_file(const std::filesystem::path& path);
WorldFile parse_world_text(const std::string& text);

}  // namespace udrl::envs
