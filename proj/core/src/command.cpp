#include "udrl/command.hpp"

#include <stdexcept>
#include <string>

namespace udrl {

std::string_view to_string(HorizonKind kind) {
  switch (kind) {
    case HorizonKind::identity: return "identity";
    case HorizonKind::harmonic: return "harmonic";
    case HorizonKind::discounted: return "discounted";
  }
  return "identity";
}

HorizonKind horizon_from_string(std::string_view s) {
  if (s == "identity") return HorizonKind::identity;
  if (s == "harmonic") return HorizonKind::harmonic;
  if (s == "discounted") return HorizonKind::discounted;
  throw std::invalid_argument("unknown horizon encoding '" + std::string(s) + "'");
}

void HorizonScheme::validate() const {
  if (!(scale > 0.0)) throw std::invalid_argument("horizon scheme: scale must be positive");
  if (kind == HorizonKind::discounted && !(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("horizon scheme: gamma must lie in (0, 1)");
  }
}

Vec encode_horizon(std::size_t steps, const HorizonScheme& scheme) {
  scheme.validate();
  double value = 0.0;
  switch (scheme.kind) {
    case HorizonKind::identity:
      value = static_cast<double>(steps);
      break;
    case HorizonKind::harmonic:
      for (std::size_t tau = 1; tau <= steps; ++tau) value += 1.0 / static_cast<double>(tau);
      break;
    case HorizonKind::discounted: {
      double g = 1.0;
      for (std::size_t tau = 1; tau <= steps; ++tau) {
        g *= scheme.gamma;
        value += g * static_cast<double>(tau);
      }
      break;
    }
  }
  return Vec{value / scheme.scale};
}

Command make_command(std::size_t steps, Vec desire, const HorizonScheme& scheme, bool morethan) {
  Command c;
  c.horizon = encode_horizon(steps, scheme);
  c.desire = std::move(desire);
  c.morethan = morethan;
  c.raw_steps = steps;
  return c;
}

Command null_command(std::size_t reward_dim) {
  Command c;
  c.horizon = Vec(kHorizonDim, 0.0);
  c.desire = Vec(reward_dim, 0.0);
  c.marker = false;
  return c;
}

}  // namespace udrl
