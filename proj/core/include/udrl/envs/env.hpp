#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "udrl/episode.hpp"

namespace udrl::envs {

enum class ActionKind { discrete, continuous, multi_binary };

std::string_view to_string(ActionKind kind);

struct EnvSpec {
  std::string name;
  Dims dims;  // m, n, o
  ActionKind action_kind = ActionKind::discrete;
  std::size_t max_steps = 50;
  bool markovian = true;
  std::size_t num_states = 0;  // > 0 for tabular worlds
  double action_low = 0.0;     // bounds of continuous actions
  double action_high = 1.0;

  void validate() const;
};

struct StepResult {
  Vec observation;
  Vec reward;
  bool done = false;
};

// Environment contract. reset() is deterministic in its seed; step()
// rejects calls after the episode is done and illegal actions. Episodes
// end when the world reaches a terminal state or after spec().max_steps.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvSpec& spec() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;

  Vec reset(std::uint64_t seed);
  StepResult step(const Vec& action);

  std::size_t steps() const { return steps_; }
  bool done() const { return done_; }
  std::uint64_t seed() const { return seed_; }

  // Index of the current state for tabular worlds.
  virtual std::optional<std::size_t> state_index() const { return std::nullopt; }

 protected:
  virtual Vec do_reset(std::uint64_t seed) = 0;
  // Called with a validated action; `t` is the 0-based step index.
  virtual StepResult do_step(const Vec& action, std::size_t t) = 0;

 private:
  std::size_t steps_ = 0;
  bool done_ = true;
  std::uint64_t seed_ = 0;
};

// Index of a one-hot discrete action; throws on anything else.
std::size_t discrete_action_index(const Vec& action, std::size_t num_actions);

}  // namespace udrl::envs
