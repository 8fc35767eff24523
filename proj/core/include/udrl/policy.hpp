#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "udrl/command.hpp"
#include "udrl/controller.hpp"
#include "udrl/envs/env.hpp"
#include "udrl/episode.hpp"
#include "udrl/rng.hpp"

namespace udrl {

// Network input rows for one environment step. One row normally; for an
// autoregressive controller o micro rows, row i fed component i-1 of
// `action` (0 for i = 0). Training (teacher forcing) and perfect-life
// replay both go through here so their inputs are bit-identical.
std::vector<Vec> step_rows(const Controller& controller, const StepInputs& in, const Command* command,
                           const Vec& action);

// Training targets matching step_rows.
std::vector<Vec> step_targets(const Controller& controller, const Vec& action);

// Command fed on already-lived steps of a recurrent trial: horizon 0,
// desire = the reward the step actually produced, extra zeroed.
Command perfect_life_command(const Vec& reward);

// When commands reach the network: every step, or only at step 1 with
// the marker unit set (later steps get null commands).
enum class CommandMode { per_step, initial_only };

std::string_view to_string(CommandMode mode);
CommandMode command_mode_from_string(std::string_view s);

// Uniformly random legal action.
Vec random_action(const envs::EnvSpec& spec, CounterRng& rng);

// Draws an action from the head's distribution (or its mode when greedy).
// Greedy categorical ties go to the lowest index. Throws DivergenceError
// on non-finite outputs.
Vec sample_action(const Controller& controller, std::span<const double> raw, const envs::EnvSpec& spec, bool greedy,
                  CounterRng& rng);

// Full action choice for one step, micro steps included. For recurrent
// controllers `state` is advanced through the fed rows.
Vec policy_action(const Controller& controller, const envs::EnvSpec& spec, const StepInputs& in, const Command* command,
                  bool greedy, CounterRng& rng, nn::RecurrentNet::State* state = nullptr);

// What the actor is asked to achieve over a whole trial.
struct TrialCommand {
  Vec desire;
  std::size_t horizon_steps = 0;  // steps allowed, counting the first
  bool morethan = false;
  std::optional<Vec> goal_obs;

  bool operator==(const TrialCommand&) const = default;
};

enum class HorizonRule { remaining_in_trial, twice_lifetime };

std::string_view to_string(HorizonRule rule);
HorizonRule horizon_rule_from_string(std::string_view s);

struct RolloutOptions {
  bool explore = false;
  double explore_fraction = 0.0;
  bool greedy = false;
  HorizonRule horizon_rule = HorizonRule::remaining_in_trial;
  bool omit_horizon = false;  // horizon zeroed; marker = "by episode end"
  CommandMode command_mode = CommandMode::per_step;
  std::size_t hidden_reset_step = 0;  // ablation: zero the memory before this step (0 = never)
  std::uint64_t lifetime_steps = 0;   // steps lived before this trial
};

struct RolloutResult {
  Episode episode;
  std::vector<Command> commands;  // live command fed at each step
  double mean_hidden_norm = 0.0;  // recurrent controllers only
};

// Command for step t (1-based) given the reward collected on steps
// 1..t-1: desire decremented by what was achieved, horizon = steps left.
Command step_command(const TrialCommand& trial, const Vec& achieved, std::size_t t, const HorizonScheme& scheme,
                     const RolloutOptions& options);

// Runs one trial from env.reset(env_seed). Recurrent controllers keep a
// perfect-life hidden state: each live step acts from a copy of it fed the
// live command, then the state is advanced with the step's perfect-life
// command. `carry` (optional) is the perfect-life state to start from and
// receives the final one (single-life mode).
RolloutResult rollout(envs::Environment& env, const Controller& controller, const TrialCommand& command,
                      const RolloutOptions& options, std::uint64_t env_seed, CounterRng& rng,
                      nn::RecurrentNet::State* carry = nullptr);

}  // namespace udrl
