#include "udrl/envs/env.hpp"

#include <stdexcept>

namespace udrl::envs {

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::discrete: return "discrete";
    case ActionKind::continuous: return "continuous";
    case ActionKind::multi_binary: return "multi_binary";
  }
  return "discrete";
}

void EnvSpec::validate() const {
  if (dims.obs == 0 || dims.reward == 0 || dims.action == 0) {
    throw std::invalid_argument("env spec: dimensions must be positive");
  }
  if (max_steps == 0) throw std::invalid_argument("env spec: max_steps must be at least 1");
}

Vec Environment::reset(std::uint64_t seed) {
  steps_ = 0;
  done_ = false;
  seed_ = seed;
  return do_reset(seed);
}

StepResult Environment::step(const Vec& action) {
  if (done_) throw std::logic_error(spec().name + ": step after episode end");
  const auto& s = spec();
  if (action.size() != s.dims.action) {
    throw std::invalid_argument(s.name + ": action has length " + std::to_string(action.size()) + ", expected " +
                                std::to_string(s.dims.action));
  }
  switch (s.action_kind) {
    case ActionKind::discrete:
      discrete_action_index(action, s.dims.action);
      break;
    case ActionKind::multi_binary:
      for (double a : action) {
        if (a != 0.0 && a != 1.0) throw std::invalid_argument(s.name + ": multi-binary action components must be 0 or 1");
      }
      break;
    case ActionKind::continuous:
      break;
  }
  StepResult r = do_step(action, steps_);
  ++steps_;
  if (steps_ >= s.max_steps) r.done = true;
  done_ = r.done;
  return r;
}

std::size_t discrete_action_index(const Vec& action, std::size_t num_actions) {
  if (action.size() != num_actions) throw std::invalid_argument("discrete action: wrong length");
  std::size_t index = num_actions;
  for (std::size_t i = 0; i < action.size(); ++i) {
    if (action[i] == 1.0 && index == num_actions) {
      index = i;
    } else if (action[i] != 0.0) {
      throw std::invalid_argument("discrete action: not a one-hot vector");
    }
  }
  if (index == num_actions) throw std::invalid_argument("discrete action: not a one-hot vector");
  return index;
}

}  // namespace udrl::envs
