#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "udrl/controller.hpp"
#include "udrl/envs/env.hpp"
#include "udrl/nn/optimizer.hpp"
#include "udrl/policy.hpp"
#include "udrl/replay.hpp"
#include "udrl/rng.hpp"

namespace udrl {

enum class DesireRule { max_seen_x2_floor_c, upper_bound };

std::string_view to_string(DesireRule rule);
DesireRule desire_rule_from_string(std::string_view s);

struct ActorConfig {
  double explore_fraction = 0.2;
  DesireRule desire_rule = DesireRule::max_seen_x2_floor_c;
  double desire_floor = 1.0;  // c
  double desire_bound = 0.0;  // used by upper_bound
  HorizonRule horizon_rule = HorizonRule::remaining_in_trial;
  bool morethan_at_exploit = false;
  bool greedy = false;        // argmax instead of sampling
  bool omit_horizon = false;  // episode-end marker instead of a horizon input
  CommandMode command_mode = CommandMode::per_step;

  void validate() const;
  bool operator==(const ActorConfig&) const = default;
};

RolloutOptions rollout_options(const ActorConfig& config, bool explore, std::uint64_t lifetime_steps = 0);

// Command for an exploration/exploitation trial. Desire: max(c, 2 * best
// return so far) or the configured bound, spread evenly over reward
// components; horizon: the environment's step limit.
TrialCommand exploit_command(const ActorConfig& config, const ReplayBuffer& buffer, const envs::EnvSpec& spec);

// One action. In explore mode, with probability explore_fraction a uniform
// random legal action; otherwise drawn from (or the mode of) the
// controller's output distribution.
Vec act(const Controller& controller, const envs::EnvSpec& spec, const StepInputs& in, const Command& command,
        bool explore, const ActorConfig& config, CounterRng& rng, nn::RecurrentNet::State* state = nullptr);

// Exploration trial with the exploit command; the episode is appended to
// the buffer.
Episode run_trial(envs::Environment& env, const Controller& controller, const ActorConfig& config,
                  ReplayBuffer& buffer, CounterRng& rng, std::uint64_t env_seed);

class RewardTable;

struct BatchConfig {
  std::size_t batches = 10;  // optimizer steps per epoch
  std::size_t batch_size = 64;
  RelabelMix mix;
  nn::LossKind loss = nn::LossKind::crossentropy;
  bool omit_horizon = false;
  CommandMode command_mode = CommandMode::per_step;  // recurrent learner
  std::size_t bptt_window = 32;
  // Stochastic worlds: exact desires come from these reward estimates.
  const RewardTable* expected_rewards = nullptr;

  void validate() const;
};

struct EpochStats {
  double mean_loss = 0.0;
  RelabelCounts counts;
};

// Replay training of a feedforward controller: `batches` optimizer steps on
// hindsight-relabeled samples. Throws NoDataError on an empty buffer and
// DivergenceError on non-finite loss.
double train_epoch(Controller& controller, const ReplayBuffer& buffer, const BatchConfig& batch,
                   nn::Optimizer& optimizer, CounterRng& rng, EpochStats* stats = nullptr);

// The command a sample should be trained with under `batch` (expected
// rewards, horizon omission).
SegmentSample prepare_sample(const SegmentSample& sample, const Episode& episode, const BatchConfig& batch,
                             const HorizonScheme& scheme);

// Running mean of immediate reward per (state, action).
class RewardTable {
 public:
  struct Entry {
    double mean = 0.0;
    std::uint64_t count = 0;
    bool operator==(const Entry&) const = default;
  };

  RewardTable() = default;
  RewardTable(std::size_t states, std::size_t actions);

  std::size_t states() const { return states_; }
  std::size_t actions() const { return actions_; }

  void update(std::size_t state, std::size_t action, double reward);
  const Entry& at(std::size_t state, std::size_t action) const;
  double mean(std::size_t state, std::size_t action) const { return at(state, action).mean; }
  std::uint64_t count(std::size_t state, std::size_t action) const { return at(state, action).count; }

  bool operator==(const RewardTable&) const = default;

 private:
  std::size_t states_ = 0;
  std::size_t actions_ = 0;
  std::vector<Entry> entries_;
};

void update_reward_table(RewardTable& table, std::size_t state, std::size_t action, double observed_reward);

// Tabular worlds index states by the argmax of the one-hot observation and
// actions by the argmax of the one-hot action; rewards are summed over
// components.
std::size_t tabular_state(const Vec& observation);

// Feeds every transition of the episode into the table.
void update_reward_table(RewardTable& table, const Episode& episode);

// relabel_segment with the desire replaced by the sum of estimated mean
// rewards over the (state, action) pairs of the segment. Throws
// EstimateMissingError if a pair has no estimate.
SegmentSample relabel_expected(const Episode& episode, std::size_t k, std::size_t j, const RewardTable& table,
                               const HorizonScheme& scheme, std::uint64_t episode_ref = 0);

// Transition counts and reward estimates of a tabular world.
class TabularModel {
 public:
  TabularModel() = default;
  TabularModel(std::size_t states, std::size_t actions);

  std::size_t states() const { return rewards_.states(); }
  std::size_t actions() const { return rewards_.actions(); }

  void observe(std::size_t state, std::size_t action, double reward, std::size_t next_state);
  void observe(const Episode& episode);

  const RewardTable& rewards() const { return rewards_; }
  std::uint64_t count(std::size_t state, std::size_t action) const { return rewards_.count(state, action); }
  std::uint64_t transitions(std::size_t state, std::size_t action, std::size_t next) const;
  // Empirical P(next | state, action); 0 if the pair was never tried.
  double probability(std::size_t state, std::size_t action, std::size_t next) const;

 private:
  RewardTable rewards_;
  std::vector<std::uint64_t> counts_;  // [s][a][s']
};

TabularModel build_tabular_model(const ReplayBuffer& buffer, std::size_t states, std::size_t actions);

struct DpResult {
  std::vector<double> values;   // V_H(s)
  std::vector<bool> unmodeled;  // state never acted from: value fixed at 0
};

// Finite-horizon expected return under `policy` (states x actions rows of
// probabilities): V_h(s) = sum_a pi(a|s) [z(s,a) + sum_s' P(s'|s,a) V_{h-1}(s')],
// V_0 = 0. Untried actions are dropped and the policy renormalized over
// the tried ones.
DpResult dp_expected_return(const TabularModel& model, std::size_t horizon,
                            const std::vector<std::vector<double>>& policy);

}  // namespace udrl
