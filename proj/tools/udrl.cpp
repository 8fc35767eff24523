// udrl: train, evaluate, command, distill and inspect upside-down RL agents.
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "udrl/errors.hpp"
#include "udrl/run.hpp"

namespace fs = std::filesystem;
using namespace udrl;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kDivergence = 3, kIo = 4 };

// Checkpoint and world to act in: from a run directory, or given explicitly.
struct Target {
  std::string run;
  std::string checkpoint;
  std::string env;
  std::string env_params = "{}";
  std::string world;

  void add(CLI::App* app) {
    app->add_option("--run", run, "Run directory (uses final.ckpt and the run's world)");
    app->add_option("--checkpoint", checkpoint, "Checkpoint file (overrides the run's final.ckpt)");
    app->add_option("--env", env, "World name (overrides the run's world)");
    app->add_option("--env-params", env_params, "World parameters as a JSON object");
    app->add_option("--world-file", world, "Map file for grid worlds");
  }

  Controller controller() const {
    if (!checkpoint.empty()) return Controller::load(checkpoint);
    if (run.empty()) throw ConfigError("--checkpoint", "give --run or --checkpoint");
    return Controller::load(fs::path(run) / "final.ckpt");
  }

  std::unique_ptr<envs::Environment> environment() const {
    if (!env.empty()) return envs::make_environment({env, env_params, world});
    if (run.empty()) throw ConfigError("--env", "give --run or --env");
    return envs::make_environment(load_config(fs::path(run) / "config.json").env);
  }
};

int run_guarded(const std::function<void()>& fn) {
  try {
    fn();
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kDivergence;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const NothingToDistillError& e) {
    std::cerr << "nothing to distill: " << e.what() << '\n';
    return kFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Upside-down reinforcement learning: command-conditioned agents trained by hindsight relabeling"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "Seed for everything random (overrides the config's seed)");

  // train
  auto* train = app.add_subcommand("train", "Train an agent from a JSON run config");
  std::string config_path, out_dir;
  std::optional<std::size_t> trials;
  bool parallel = false;
  train->add_option("config", config_path, "Run config (JSON)")->required();
  train->add_option("--out", out_dir, "Run directory (overrides output_dir)");
  train->add_option("--trials", trials, "Number of trials (overrides the config)");
  train->add_flag("--parallel", parallel, "Actor and learner in separate threads (not bit-reproducible)");
  train->add_option("--seed", seed, "Seed (overrides the config's seed)");

  // eval
  auto* eval = app.add_subcommand("eval", "Issue one command repeatedly and report how often it is satisfied");
  Target eval_target;
  eval_target.add(eval);
  double desire = 0.0, tolerance = 0.1;
  std::size_t horizon = 0, eval_trials = 100, reset_step = 0;
  bool morethan = false, greedy = false;
  std::string csv;
  eval->add_option("--desire", desire, "Desired return")->required();
  eval->add_option("--horizon", horizon, "Steps allowed")->required();
  eval->add_flag("--morethan", morethan, "Treat desire as a lower bound");
  eval->add_option("--trials", eval_trials, "Number of trials")->check(CLI::PositiveNumber);
  eval->add_option("--tolerance", tolerance, "Relative tolerance of exact commands");
  eval->add_flag("--greedy", greedy, "Most probable action instead of sampling");
  eval->add_option("--hidden-reset-step", reset_step, "Ablation: zero recurrent memory before this step");
  eval->add_option("--csv", csv, "Append per-trial results here (default: <run>/eval.csv with --run)");
  eval->add_option("--seed", seed, "Seed");

  // command
  auto* command = app.add_subcommand("command", "Read 'desire horizon [morethan]' lines from stdin, run one trial each");
  Target cmd_target;
  cmd_target.add(command);
  command->add_option("--tolerance", tolerance, "Relative tolerance of exact commands");
  command->add_option("--seed", seed, "Seed");

  // distill
  auto* distill_cmd = app.add_subcommand("distill", "Compress successful behavior into a command-free policy");
  std::string distill_run_dir;
  DistillConfig dc;
  std::string rule = "top_quantile", student = "rnn";
  distill_cmd->add_option("run", distill_run_dir, "Run directory")->required();
  distill_cmd->add_option("--rule", rule, "Success rule: top_quantile or threshold");
  distill_cmd->add_option("--quantile", dc.quantile, "Top fraction of returns counted as successful");
  distill_cmd->add_option("--threshold", dc.threshold, "Return threshold for the threshold rule");
  distill_cmd->add_option("--student", student, "Student network: rnn or ffw");
  distill_cmd->add_option("--hidden-dim", dc.hidden_dim, "Student hidden size (0: half the teacher's)");
  distill_cmd->add_option("--steps", dc.steps, "Optimizer steps");
  distill_cmd->add_option("--lr", dc.optimizer.lr, "Learning rate");
  distill_cmd->add_option("--seed", seed, "Seed");

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Summarize a run directory");
  std::string inspect_dir;
  inspect->add_option("run", inspect_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  if (*train) {
    return run_guarded([&] {
      RunConfig cfg = load_config(config_path);
      if (seed) cfg.seed = *seed;
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (trials) cfg.trials = *trials;
      if (parallel) cfg.parallel = true;
      const TrainResult r = train_run(cfg);
      double best = r.metrics.empty() ? 0.0 : r.metrics.front().ret;
      for (const auto& m : r.metrics) best = std::max(best, m.ret);
      std::cout << "trials: " << r.metrics.size() << "\nbest_return: " << best << "\nrun: " << cfg.output_dir << '\n';
    });
  }
  if (*eval) {
    return run_guarded([&] {
      const Controller c = eval_target.controller();
      auto env = eval_target.environment();
      EvalRequest rq;
      rq.desire.assign(env->spec().dims.reward, desire / static_cast<double>(env->spec().dims.reward));
      rq.horizon_steps = horizon;
      rq.morethan = morethan;
      rq.trials = eval_trials;
      rq.tolerance = tolerance;
      rq.greedy = greedy;
      rq.seed = seed.value_or(0);
      rq.hidden_reset_step = reset_step;
      if (!eval_target.run.empty()) {
        const RunConfig cfg = load_config(fs::path(eval_target.run) / "config.json");
        rq.command_mode = cfg.actor.command_mode;
        rq.omit_horizon = cfg.actor.omit_horizon;
      }
      const EvalSummary s = evaluate(c, *env, rq);
      std::string out = csv;
      if (out.empty() && !eval_target.run.empty()) out = (fs::path(eval_target.run) / "eval.csv").string();
      if (!out.empty()) write_eval_csv(out, s);
      std::cout << "trials: " << s.trials.size() << "\nmean_return: " << s.mean_return
                << "\nstd_return: " << s.std_return << "\nsatisfaction: " << s.satisfaction << '\n';
    });
  }
  if (*command) {
    return run_guarded([&] {
      const Controller c = cmd_target.controller();
      auto env = cmd_target.environment();
      command_loop(c, *env, std::cin, std::cout, std::cerr, seed.value_or(0), tolerance);
    });
  }
  if (*distill_cmd) {
    return run_guarded([&] {
      try {
        dc.rule = success_rule_from_string(rule);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("--rule", e.what());
      }
      try {
        dc.net = net_from_string(student);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("--student", e.what());
      }
      dc.seed = seed.value_or(0);
      try {
        dc.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError("distill", e.what());
      }
      const DistillReport r = distill_run(distill_run_dir, dc);
      std::cout << "successful_episodes: " << r.successful << "\nagreement: " << r.agreement
                << "\nagreement_unsuccessful: ";
      if (r.agreement_unsuccessful < 0) {
        std::cout << "n/a";
      } else {
        std::cout << r.agreement_unsuccessful;
      }
      std::cout << "\naudit: " << (r.audit.passed ? "pass" : "fail") << " (" << r.audit.detail
                << ", params=" << r.audit.params << ")\ncheckpoint: " << (fs::path(distill_run_dir) / "cc.ckpt").string()
                << '\n';
    });
  }
  if (*inspect) {
    return run_guarded([&] { print_summary(std::cout, inspect_run(inspect_dir)); });
  }
  return kFailure;
}
