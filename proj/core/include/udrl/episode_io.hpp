#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "udrl/episode.hpp"

namespace udrl {

// Line-delimited JSON, one episode per line:
//   {"env_id":"grid_world","seed":7,"dims":[m,n,o],
//    "observations":[[...], ... T+1 entries],
//    "actions":[[...], ... T entries],
//    "rewards":[[...], ... T entries]}
// observations[T] is the observation after the final action. prev_action is
// not stored; it is actions[t-1] (zeros at t = 1).
std::string episode_to_json_line(const Episode& episode);
Episode episode_from_json_line(std::string_view line);

void save_episodes(const std::filesystem::path& path, std::span<const Episode> episodes);
std::vector<Episode> load_episodes(const std::filesystem::path& path);

}  // namespace udrl
