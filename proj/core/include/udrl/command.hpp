#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "udrl/episode.hpp"

namespace udrl {

enum class HorizonKind { identity, harmonic, discounted };

std::string_view to_string(HorizonKind kind);
HorizonKind horizon_from_string(std::string_view s);

// How a look-ahead step count is turned into the horizon input.
//   identity:   steps
//   harmonic:   sum_{tau=1..steps} 1/tau
//   discounted: sum_{tau=1..steps} gamma^tau * tau   (bounded by gamma/(1-gamma)^2)
// The result is divided by `scale` before it reaches the network.
struct HorizonScheme {
  HorizonKind kind = HorizonKind::identity;
  double gamma = 0.9;
  double scale = 1.0;

  void validate() const;
  bool operator==(const HorizonScheme&) const = default;
};

// Horizon encodings are scalar (p = 1).
inline constexpr std::size_t kHorizonDim = 1;

Vec encode_horizon(std::size_t steps, const HorizonScheme& scheme);

// Task-defining input: horizon, desire, extra = [morethan, marker, goal...].
struct Command {
  Vec horizon;
  Vec desire;
  bool morethan = false;
  std::optional<Vec> goal_obs;
  bool marker = true;
  std::size_t raw_steps = 0;

  bool operator==(const Command&) const = default;
};

Command make_command(std::size_t steps, Vec desire, const HorizonScheme& scheme, bool morethan = false);

// Command with zero horizon, zero desire and zeroed extra. Fed on steps
// whose command should be ignored (marker mode).
Command null_command(std::size_t reward_dim);

}  // namespace udrl
