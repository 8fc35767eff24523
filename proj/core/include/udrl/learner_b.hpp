#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "udrl/controller.hpp"
#include "udrl/learner_a.hpp"
#include "udrl/nn/train.hpp"
#include "udrl/policy.hpp"
#include "udrl/replay.hpp"

namespace udrl {

// One step of a replayed history as the recurrent controller sees it.
struct HistoryStep {
  Vec all;  // prev_action | observation | prev_reward
  Command command;
  Vec action_taken;
};

// Commands for steps 1..upto-1 "as if life so far had been perfect":
// horizon 0, desire = the step's realized reward, extra zeroed.
std::vector<Command> perfect_life_commands(const Episode& episode, std::size_t upto);

// History fed when training on `sample`: per-step mode replays steps
// 1..k-1 with perfect-life commands and step k with the sample's command;
// initial-only mode (k = 1) feeds the command at step 1 and null commands
// on steps 2..j.
std::vector<HistoryStep> training_history(const Episode& episode, const SegmentSample& sample, CommandMode mode);

// Masked sequence for BPTT: loss only at step k (per-step mode) or on
// steps 1..j (initial-only mode).
nn::SequenceExample build_sequence(const Controller& controller, const Episode& episode, const SegmentSample& sample,
                                   CommandMode mode);

// Initial-only mode batches: segments (1, j) with j uniform in 1..T.
std::vector<SegmentSample> sample_initial_batch(const ReplayBuffer& buffer, std::size_t batch_size,
                                                const RelabelMix& mix, const HorizonScheme& scheme, CounterRng& rng,
                                                RelabelCounts* counts = nullptr);

double train_epoch_rnn(Controller& controller, const ReplayBuffer& buffer, const BatchConfig& batch,
                       nn::Optimizer& optimizer, CounterRng& rng, EpochStats* stats = nullptr);

struct RnnTrialOptions {
  std::size_t hidden_reset_step = 0;  // ablation: memory zeroed before this step
  bool single_life = false;           // merge into the buffer's one growing episode
};

// Exploration trial of a recurrent controller (commands as in run_trial).
// In single-life mode `life` carries the perfect-life hidden state across
// trials and the step counter continues from the stored episode's length.
RolloutResult run_trial_rnn(envs::Environment& env, const Controller& controller, const ActorConfig& config,
                            ReplayBuffer& buffer, CounterRng& rng, std::uint64_t env_seed,
                            const RnnTrialOptions& options = {}, nn::RecurrentNet::State* life = nullptr);

// Marker unit values of a command sequence.
std::vector<double> marker_sequence(const std::vector<Command>& commands);

// Multi-binary action sampled component by component over o micro steps;
// each component conditions on the previous ones.
Vec act_autoregressive(const Controller& controller, const envs::EnvSpec& spec, const StepInputs& in,
                       const Command* command, CounterRng& rng, nn::RecurrentNet::State* state = nullptr);

// Probability of every one of the 2^o patterns under the micro-step
// factorization. Pattern index bit i is component i. `state` (recurrent
// controllers) is not modified.
std::vector<double> autoregressive_joint(const Controller& controller, const StepInputs& in, const Command* command,
                                         const nn::RecurrentNet::State* state = nullptr);

}  // namespace udrl
