#include "udrl/compress.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "udrl/errors.hpp"
#include "udrl/nn/train.hpp"
#include "udrl/policy.hpp"

namespace udrl {

std::string_view to_string(SuccessRule rule) { return rule == SuccessRule::threshold ? "threshold" : "top_quantile"; }

SuccessRule success_rule_from_string(std::string_view s) {
  if (s == "threshold") return SuccessRule::threshold;
  if (s == "top_quantile") return SuccessRule::top_quantile;
  throw std::invalid_argument("unknown success rule '" + std::string(s) + "'");
}

void DistillConfig::validate() const {
  if (rule == SuccessRule::top_quantile && !(quantile > 0.0 && quantile <= 1.0)) {
    throw std::invalid_argument("distill: quantile must lie in (0, 1]");
  }
  if (rule == SuccessRule::threshold && !std::isfinite(threshold)) {
    throw std::invalid_argument("distill: threshold must be finite");
  }
  if (steps == 0) throw std::invalid_argument("distill: steps must be positive");
}

std::vector<Episode> successful_episodes(const ReplayBuffer& buffer, const DistillConfig& config) {
  config.validate();
  double bar = config.threshold;
  if (config.rule == SuccessRule::top_quantile) {
    if (buffer.empty()) return {};
    std::vector<double> returns;
    for (const auto& e : buffer.entries()) returns.push_back(e.episode.return_value());
    std::sort(returns.begin(), returns.end(), std::greater<>());
    const auto m = static_cast<std::size_t>(std::ceil(config.quantile * static_cast<double>(returns.size())));
    bar = returns[std::max<std::size_t>(m, 1) - 1];
  }
  std::vector<Episode> out;
  for (const auto& e : buffer.entries()) {
    if (e.episode.return_value() >= bar) out.push_back(e.episode);
  }
  return out;
}

ControllerSpec student_spec(const ControllerSpec& teacher, const DistillConfig& config) {
  ControllerSpec s = teacher;
  s.layout.commands = false;
  s.layout.autoregressive = false;
  s.net = config.net;
  const std::size_t teacher_width =
      teacher.net == NetKind::rnn ? teacher.hidden_dim : (teacher.hidden.empty() ? 2 : teacher.hidden.front());
  s.hidden_dim = config.hidden_dim > 0 ? config.hidden_dim : std::max<std::size_t>(1, teacher_width / 2);
  if (!config.hidden.empty()) {
    s.hidden = config.hidden;
  } else {
    s.hidden.clear();
    const auto& src = teacher.net == NetKind::ffw ? teacher.hidden : std::vector<std::size_t>{teacher.hidden_dim};
    for (std::size_t h : src) s.hidden.push_back(std::max<std::size_t>(1, h / 2));
  }
  return s;
}

Controller distill(const ReplayBuffer& buffer, const DistillConfig& config, const ControllerSpec& teacher) {
  const auto episodes = successful_episodes(buffer, config);
  if (episodes.empty()) throw NothingToDistillError("no episode satisfies the success rule");
  Controller cc(student_spec(teacher, config), config.seed);
  nn::Optimizer opt(config.optimizer);
  if (cc.recurrent()) {
    std::vector<nn::SequenceExample> seqs;
    for (const auto& ep : episodes) {
      nn::SequenceExample seq;
      seq.initial = cc.initial_state();
      for (std::size_t t = 1; t <= ep.size(); ++t) {
        seq.inputs.push_back(cc.encode(step_inputs(ep, t), nullptr));
        seq.targets.push_back(ep.step(t).action);
        seq.mask.push_back(1.0);
      }
      seqs.push_back(std::move(seq));
    }
    for (std::size_t s = 0; s < config.steps; ++s) {
      nn::bptt_step(cc.rnn(), cc.head(), seqs, config.loss, opt, std::max(config.bptt_window, std::size_t{1}));
    }
  } else {
    std::vector<nn::Example> examples;
    for (const auto& ep : episodes) {
      for (std::size_t t = 1; t <= ep.size(); ++t) {
        examples.push_back({cc.encode(step_inputs(ep, t), nullptr), ep.step(t).action});
      }
    }
    for (std::size_t s = 0; s < config.steps; ++s) nn::train_step(cc.mlp(), cc.head(), examples, config.loss, opt);
  }
  return cc;
}

double fidelity(const Controller& cc, const std::vector<Episode>& episodes, const envs::EnvSpec& spec) {
  if (episodes.empty()) throw std::invalid_argument("fidelity: no episodes");
  if (!cc.command_free()) throw std::invalid_argument("fidelity: command-free policy expected");
  std::size_t agree = 0;
  std::size_t total = 0;
  CounterRng unused(0);
  for (const auto& ep : episodes) {
    nn::RecurrentNet::State state;
    if (cc.recurrent()) state = cc.initial_state();
    for (std::size_t t = 1; t <= ep.size(); ++t) {
      const Vec x = cc.encode(step_inputs(ep, t), nullptr);
      const Vec raw = cc.recurrent() ? cc.step(x, state) : cc.forward(x);
      const Vec a = sample_action(cc, raw, spec, true, unused);
      const Vec& ref = ep.step(t).action;
      bool same = a.size() == ref.size();
      for (std::size_t i = 0; same && i < a.size(); ++i) {
        same = spec.action_kind == envs::ActionKind::continuous ? std::abs(a[i] - ref[i]) <= 0.05 : a[i] == ref[i];
      }
      agree += same;
      ++total;
    }
  }
  return static_cast<double>(agree) / static_cast<double>(total);
}

AuditResult structural_audit(const Controller& cc) {
  AuditResult r;
  const InputLayout& l = cc.layout();
  r.input_units = cc.recurrent() ? cc.rnn().input_dim() : cc.mlp().input_dim();
  r.command_units = l.command_size();
  r.params = cc.num_params();
  InputLayout bare = l;
  bare.commands = false;
  const std::size_t in = bare.size();
  const std::size_t out = cc.head().raw_dim();
  if (cc.recurrent()) {
    const std::size_t g = cc.spec().cell == nn::CellKind::lstm ? 4 : 1;
    const std::size_t h = cc.spec().hidden_dim;
    r.expected_params = g * h * (in + h + 1) + out * (h + 1);
  } else {
    std::size_t prev = in;
    for (std::size_t w : cc.spec().hidden) {
      r.expected_params += w * (prev + 1);
      prev = w;
    }
    r.expected_params += out * (prev + 1);
  }
  r.passed = r.command_units == 0 && cc.command_free() && r.input_units == in && r.params == r.expected_params;
  r.detail = r.passed ? "no command inputs" : "command inputs present or parameter count mismatch";
  return r;
}

}  // namespace udrl
