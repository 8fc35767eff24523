#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "udrl/controller.hpp"
#include "udrl/envs/env.hpp"
#include "udrl/nn/optimizer.hpp"
#include "udrl/replay.hpp"

namespace udrl {

enum class SuccessRule { threshold, top_quantile };

std::string_view to_string(SuccessRule rule);
SuccessRule success_rule_from_string(std::string_view s);

struct DistillConfig {
  SuccessRule rule = SuccessRule::top_quantile;
  double threshold = 0.0;  // return >= threshold
  double quantile = 0.1;   // top fraction of stored returns, ties included

  // Student architecture; hidden sizes of 0 mean "half the teacher's".
  NetKind net = NetKind::rnn;
  std::size_t hidden_dim = 0;
  std::vector<std::size_t> hidden;
  std::size_t steps = 300;  // optimizer steps, each over all successful episodes
  nn::OptimizerConfig optimizer{nn::OptimizerKind::adam, 1e-2};
  nn::LossKind loss = nn::LossKind::crossentropy;
  std::size_t bptt_window = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

// Episodes counted as successful under the rule, in buffer order.
std::vector<Episode> successful_episodes(const ReplayBuffer& buffer, const DistillConfig& config);

// Student spec: the teacher's interface without command inputs.
ControllerSpec student_spec(const ControllerSpec& teacher, const DistillConfig& config);

// Trains a command-free policy CC to reproduce the actions of successful
// episodes from their history prefixes. Throws NothingToDistillError if
// nothing qualifies. Bit-identical for identical inputs.
Controller distill(const ReplayBuffer& buffer, const DistillConfig& config, const ControllerSpec& teacher);

// Fraction of steps where CC's greedy action equals the recorded action,
// CC conditioned on the recorded history up to that step.
double fidelity(const Controller& cc, const std::vector<Episode>& episodes, const envs::EnvSpec& spec);

struct AuditResult {
  bool passed = false;
  std::size_t input_units = 0;
  std::size_t command_units = 0;
  std::size_t params = 0;
  std::size_t expected_params = 0;  // parameter count of the same net without any command unit
  std::string detail;
};

// Checks that CC has no command inputs and no weights attached to them.
AuditResult structural_audit(const Controller& cc);

}  // namespace udrl
