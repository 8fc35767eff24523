#include "udrl/envs/registry.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "udrl/envs/worlds.hpp"
#include "udrl/errors.hpp"

namespace udrl::envs {

using nlohmann::json;

namespace {

class Params {
 public:
  Params(json j, std::string prefix) : j_(std::move(j)), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError(prefix_, "must be a JSON object");
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(prefix_ + "." + key, e.what());
    }
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }
  bool has(const std::string& key) const { return j_.contains(key); }

  void reject_unknown() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ConfigError(prefix_ + "." + key, "unknown parameter");
    }
  }

 private:
  json j_;
  std::string prefix_;
  std::set<std::string> used_;
};

GridParams grid_params(Params& p) {
  GridParams g;
  g.step_reward = p.get("step_reward", g.step_reward);
  g.goal_reward = p.get("goal_reward", g.goal_reward);
  g.max_steps = p.get<std::size_t>("max_steps", g.max_steps);
  if (g.max_steps == 0) throw ConfigError("env.params.max_steps", "must be at least 1");
  return g;
}

}  // namespace

const std::vector<std::string>& environment_names() {
  static const std::vector<std::string> names = {"grid_world", "fork_world", "multi_start_grid", "obstacle_line",
                                                 "tmaze",      "stochastic_grid", "twin_bits", "null_world"};
  return names;
}

WorldFile parse_world_text(const std::string& text) {
  WorldFile wf;
  std::istringstream in(text);
  std::string line;
  bool in_params = false;
  std::string params;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!in_params && line == "---") {
      in_params = true;
      continue;
    }
    if (in_params) {
      params += line;
      params += '\n';
    } else if (!line.empty()) {
      wf.rows.push_back(line);
    }
  }
  wf.params_json = params.find_first_not_of(" \t\r\n") == std::string::npos ? "{}" : params;
  return wf;
}

WorldFile read_world_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open world file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_world_text(ss.str());
}

std::unique_ptr<Environment> make_environment(const EnvConfig& config) {
  json params;
  try {
    params = json::parse(config.params_json.empty() ? std::string("{}") : config.params_json);
  } catch (const json::exception& e) {
    throw ConfigError("env.params", e.what());
  }
  if (!params.is_object()) throw ConfigError("env.params", "must be a JSON object");

  std::vector<std::string> rows;
  if (!config.world_file.empty()) {
    WorldFile wf = read_world_file(config.world_file);
    rows = std::move(wf.rows);
    json file_params;
    try {
      file_params = json::parse(wf.params_json);
    } catch (const json::exception& e) {
      throw ConfigError("env.world_file", std::string("parameter block: ") + e.what());
    }
    if (!file_params.is_object()) throw ConfigError("env.world_file", "parameter block must be a JSON object");
    for (auto& [k, v] : params.items()) file_params[k] = v;
    params = std::move(file_params);
  }

  auto parse_map = [&](GridMap fallback) {
    if (rows.empty()) return fallback;
    try {
      return GridMap::parse(rows);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("env.world_file", e.what());
    }
  };

  Params p(params, "env.params");
  const auto& name = config.name;
  std::unique_ptr<Environment> env;
  try {
    if (name == "grid_world" || name == "fork_world" || name == "multi_start_grid") {
      GridWorld base = name == "grid_world"  ? GridWorld::default_grid()
                       : name == "fork_world" ? GridWorld::default_fork()
                                              : GridWorld::multi_start();
      const GridParams gp = grid_params(p);
      env = std::make_unique<GridWorld>(name, parse_map(base.map()), gp);
    } else if (name == "stochastic_grid") {
      TwoPointReward d;
      d.low = p.get("low", d.low);
      d.high = p.get("high", d.high);
      d.p_high = p.get("p_high", d.p_high);
      const auto max_steps = p.get<std::size_t>("max_steps", 50);
      auto world = std::make_unique<StochasticGrid>(parse_map(StochasticGrid::default_world().map()), d, max_steps);
      if (p.has("overrides")) {
        for (const auto& o : p.raw("overrides")) {
          TwoPointReward od = d;
          od.low = o.value("low", d.low);
          od.high = o.value("high", d.high);
          od.p_high = o.value("p_high", d.p_high);
          world->set_distribution(o.at("cell").get<std::size_t>(), o.at("action").get<std::size_t>(), od);
        }
      }
      env = std::move(world);
    } else if (name == "obstacle_line") {
      env = std::make_unique<ObstacleLine>(p.get("high_reward", 10.0), p.get("margin", 0.1));
    } else if (name == "tmaze") {
      env = std::make_unique<TMaze>(p.get<std::size_t>("corridor_length", 4), p.get("success_reward", 1.0),
                                    p.get("failure_reward", 0.0), p.get<std::size_t>("max_steps", 20));
    } else if (name == "twin_bits") {
      env = std::make_unique<TwinBits>(p.get<std::size_t>("bits", 2));
    } else if (name == "null_world") {
      env = std::make_unique<NullWorld>();
    } else {
      throw ConfigError("env.name", "unknown environment '" + name + "'");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("env.params", e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError("env.params.overrides", e.what());
  } catch (const json::exception& e) {
    throw ConfigError("env.params", e.what());
  }
  p.reject_unknown();
  return env;
}

}  // namespace udrl::envs
