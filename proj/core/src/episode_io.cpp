#include "udrl/episode_io.hpp"

#include <fstream>

#include "json.hpp"
#include "udrl/errors.hpp"

namespace udrl {

using nlohmann::json;

std::string episode_to_json_line(const Episode& episode) {
  json observations = json::array();
  json actions = json::array();
  json rewards = json::array();
  for (const auto& tr : episode.transitions()) {
    observations.push_back(tr.observation);
    actions.push_back(tr.action);
    rewards.push_back(tr.reward);
  }
  observations.push_back(episode.final_observation());
  const auto& d = episode.dims();
  json j = {{"env_id", episode.env_id()},
            {"seed", episode.seed()},
            {"dims", {d.obs, d.reward, d.action}},
            {"observations", std::move(observations)},
            {"actions", std::move(actions)},
            {"rewards", std::move(rewards)}};
  return j.dump();
}

Episode episode_from_json_line(std::string_view line) {
  try {
    const json j = json::parse(line);
    const auto dims_arr = j.at("dims").get<std::vector<std::size_t>>();
    if (dims_arr.size() != 3) throw IoError("episode record: dims must have 3 entries");
    const Dims dims{dims_arr[0], dims_arr[1], dims_arr[2]};
    const auto observations = j.at("observations").get<std::vector<Vec>>();
    const auto actions = j.at("actions").get<std::vector<Vec>>();
    const auto rewards = j.at("rewards").get<std::vector<Vec>>();
    if (actions.size() != rewards.size() || observations.size() != actions.size() + 1) {
      throw IoError("episode record: inconsistent array lengths");
    }
    std::vector<Transition> transitions;
    transitions.reserve(actions.size());
    Vec prev(dims.action, 0.0);
    for (std::size_t t = 0; t < actions.size(); ++t) {
      transitions.push_back(Transition{prev, observations[t], rewards[t], actions[t]});
      prev = actions[t];
    }
    return Episode(j.at("env_id").get<std::string>(), j.at("seed").get<std::uint64_t>(), dims,
                   std::move(transitions), observations.back());
  } catch (const json::exception& e) {
    throw IoError(std::string("episode record: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("episode record: ") + e.what());
  }
}

void save_episodes(const std::filesystem::path& path, std::span<const Episode> episodes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& e : episodes) out << episode_to_json_line(e) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<Episode> load_episodes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Episode> episodes;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    episodes.push_back(episode_from_json_line(line));
  }
  return episodes;
}

}  // namespace udrl
