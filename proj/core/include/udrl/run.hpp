#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "udrl/compress.hpp"
#include "udrl/controller.hpp"
#include "udrl/envs/registry.hpp"
#include "udrl/learner_a.hpp"
#include "udrl/learner_b.hpp"
#include "udrl/nn/optimizer.hpp"
#include "udrl/replay.hpp"

namespace udrl {

struct NetworkConfig {
  std::string head = "auto";  // auto: softmax / gaussian / sigmoid by action kind
  std::vector<std::size_t> hidden = {64, 64};
  nn::Activation activation = nn::Activation::tanh;
  nn::CellKind cell = nn::CellKind::lstm;
  std::size_t hidden_dim = 32;
  bool step_counter = false;
  bool autoregressive = false;
  double desire_scale = 0.0;  // 0: max(1, largest |return| in the buffer), updated every trial
  std::uint64_t init_seed = 0;

  bool operator==(const NetworkConfig&) const = default;
};

struct ReplayConfig {
  std::size_t capacity = 1000;
  SelectionPolicy selection = SelectionPolicy::all;
  bool single_life = false;

  bool operator==(const ReplayConfig&) const = default;
};

struct TrainBatchConfig {
  std::size_t batches = 10;
  std::size_t batch_size = 64;
  std::string loss = "auto";  // auto: crossentropy, or gaussian_nll for gaussian heads
  std::size_t bptt_window = 32;
  bool expected_rewards = false;

  bool operator==(const TrainBatchConfig&) const = default;
};

struct RunConfig {
  envs::EnvConfig env;
  NetKind learner = NetKind::ffw;
  std::uint64_t seed = 0;
  std::size_t trials = 200;
  std::size_t epochs_per_trial = 1;
  bool parallel = false;
  std::size_t sync_interval = 1;  // parallel mode: learner epochs between snapshots
  std::size_t checkpoint_every = 0;
  std::string output_dir = "run";
  ActorConfig actor;
  NetworkConfig network;
  nn::OptimizerConfig optimizer;
  ReplayConfig replay;
  TrainBatchConfig batch;
  RelabelMix relabel;
  HorizonScheme horizon{HorizonKind::identity, 0.9, 0.0};  // scale 0: the world's step limit

  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

// JSON with every field present; parse rejects unknown keys and wrong
// types with a ConfigError naming the field path (e.g. "actor.explore_fraction").
std::string config_to_json(const RunConfig& config);
RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// Derived pieces of a run.
ControllerSpec controller_spec(const RunConfig& config, const envs::EnvSpec& spec);
BatchConfig batch_config(const RunConfig& config, const ControllerSpec& spec, const RewardTable* expected);
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);

inline constexpr const char* kMetricsVersionLine = "# metrics v1";

struct MetricsRow {
  std::size_t trial = 0;
  double ret = 0.0;
  double desire = 0.0;
  double loss = 0.0;
  double explore_fraction = 0.0;
  std::optional<double> hidden_norm;  // recurrent learner only
};

void write_metrics_header(std::ostream& out, bool recurrent);
void write_metrics_row(std::ostream& out, const MetricsRow& row);
// Throws IoError on a malformed file.
std::vector<MetricsRow> read_metrics(const std::filesystem::path& path);

struct RunFiles {
  std::filesystem::path dir;
  std::filesystem::path config() const { return dir / "config.json"; }
  std::filesystem::path metrics() const { return dir / "metrics.csv"; }
  std::filesystem::path checkpoint() const { return dir / "final.ckpt"; }
  std::filesystem::path buffer() const { return dir / "buffer.jsonl"; }
  std::filesystem::path stats() const { return dir / "stats.json"; }
};

struct TrainResult {
  Controller controller;
  ReplayBuffer buffer;
  std::vector<MetricsRow> metrics;
  RelabelCounts relabel_counts;
};

// Runs a whole training job and writes the run directory (resolved
// config, metrics CSV, checkpoints, buffer snapshot, stats). Sequential
// mode is deterministic in config.seed.
TrainResult train_run(const RunConfig& config);

struct EvalRequest {
  Vec desire;
  std::size_t horizon_steps = 0;
  bool morethan = false;
  std::size_t trials = 100;
  double tolerance = 0.1;  // relative: |return - desire| <= tolerance * |desire|
  bool greedy = false;
  std::uint64_t seed = 0;
  std::size_t hidden_reset_step = 0;
  CommandMode command_mode = CommandMode::per_step;
  bool omit_horizon = false;
};

struct EvalTrial {
  std::size_t trial = 0;
  double ret = 0.0;
  std::size_t steps = 0;
  bool satisfied = false;
};

struct EvalSummary {
  double mean_return = 0.0;
  double std_return = 0.0;
  double satisfaction = 0.0;
  std::vector<EvalTrial> trials;
};

bool command_satisfied(double achieved, double desire, bool morethan, double tolerance);

// Issues the same command for N trials. Throws std::invalid_argument on a
// controller/world dimension mismatch.
EvalSummary evaluate(const Controller& controller, envs::Environment& env, const EvalRequest& request);

void write_eval_csv(const std::filesystem::path& path, const EvalSummary& summary);

// Line-oriented command loop: each input line "desire horizon [morethan]"
// yields one result line; malformed lines produce an error line. Returns
// the number of trials run.
std::size_t command_loop(const Controller& controller, envs::Environment& env, std::istream& in, std::ostream& out,
                         std::ostream& err, std::uint64_t seed, double tolerance = 0.1);

struct DistillReport {
  std::size_t successful = 0;
  double agreement = 0.0;
  double agreement_unsuccessful = -1.0;  // diagnostic; -1 if none
  AuditResult audit;
};

// Distills the run's buffer into dir/cc.ckpt and writes dir/distill.json.
DistillReport distill_run(const std::filesystem::path& run_dir, const DistillConfig& config);

struct RunSummary {
  double best_return = 0.0;
  std::size_t metrics_rows = 0;
  std::size_t episodes = 0;
  std::size_t pairs = 0;
  RelabelCounts relabel_counts;
  std::string config_json;
};

// Read-only summary of a run directory. Missing files count as empty;
// corrupted ones throw IoError.
RunSummary inspect_run(const std::filesystem::path& run_dir);
void print_summary(std::ostream& out, const RunSummary& summary);

}  // namespace udrl
