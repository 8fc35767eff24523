#include "udrl/run.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "udrl/episode_io.hpp"
#include "udrl/errors.hpp"
#include "udrl/policy.hpp"

namespace udrl {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Strict reader for one JSON object: every key must be consumed.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "must be a JSON object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  void get(const std::string& key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(field(key), e.what());
    }
  }

  // Enum-like field parsed through `conv`.
  template <typename T, typename F>
  void get_enum(const std::string& key, T& out, F conv) {
    std::string s;
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      s = j_.at(key).get<std::string>();
      out = conv(s);
    } catch (const json::exception& e) {
      throw ConfigError(field(key), e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(field(key), e.what());
    }
  }

  Obj child(const std::string& key) {
    used_.insert(key);
    static const json empty = json::object();
    return Obj(j_.contains(key) ? j_.at(key) : empty, field(key));
  }

  const json* raw(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void done() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ConfigError(field(key), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

}  // namespace

void RunConfig::validate() const {
  require(trials > 0, "trials", "must be positive");
  require(epochs_per_trial > 0, "epochs_per_trial", "must be positive");
  require(sync_interval > 0, "sync_interval", "must be positive");
  require(!output_dir.empty(), "output_dir", "must not be empty");
  require(actor.explore_fraction >= 0.0 && actor.explore_fraction <= 1.0, "actor.explore_fraction",
          "must lie in [0, 1]");
  require(actor.desire_floor > 0.0, "actor.desire_floor", "must be positive");
  require(std::isfinite(actor.desire_bound), "actor.desire_bound", "must be finite");
  require(actor.command_mode == CommandMode::per_step || learner == NetKind::rnn, "actor.command_mode",
          "initial_only needs the rnn learner");
  require(network.head == "auto" || network.head == "softmax" || network.head == "sigmoid" ||
              network.head == "gaussian",
          "network.head", "must be auto, softmax, sigmoid or gaussian");
  require(learner == NetKind::ffw || network.hidden_dim > 0, "network.hidden_dim", "must be positive");
  for (std::size_t h : network.hidden) require(h > 0, "network.hidden", "layer widths must be positive");
  require(network.desire_scale >= 0.0 && std::isfinite(network.desire_scale), "network.desire_scale",
          "must be >= 0 (0 = adaptive)");
  require(optimizer.lr > 0.0 && std::isfinite(optimizer.lr), "optimizer.lr", "must be positive");
  require(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0, "optimizer.beta1", "must lie in [0, 1)");
  require(optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0, "optimizer.beta2", "must lie in [0, 1)");
  require(optimizer.epsilon > 0.0, "optimizer.epsilon", "must be positive");
  require(replay.capacity > 0, "replay.capacity", "must be positive");
  require(batch.batches > 0, "batch.batches", "must be positive");
  require(batch.batch_size > 0, "batch.batch_size", "must be positive");
  require(batch.bptt_window > 0, "batch.bptt_window", "must be positive");
  if (batch.loss != "auto") {
    try {
      nn::loss_from_string(batch.loss);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("batch.loss", e.what());
    }
  }
  try {
    relabel.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("relabel", e.what());
  }
  require(horizon.scale >= 0.0 && std::isfinite(horizon.scale), "horizon.scale", "must be >= 0 (0 = step limit)");
  require(horizon.gamma > 0.0 && horizon.gamma < 1.0, "horizon.gamma", "must lie in (0, 1)");
  const auto env_ptr = envs::make_environment(env);
  const envs::EnvSpec& es = env_ptr->spec();
  require(!batch.expected_rewards || es.num_states > 0, "batch.expected_rewards", "needs a tabular world");
  require(!network.autoregressive || es.action_kind == envs::ActionKind::multi_binary, "network.autoregressive",
          "needs a multi-binary action world");
}

std::string config_to_json(const RunConfig& c) {
  json j;
  json params = json::parse(c.env.params_json.empty() ? std::string("{}") : c.env.params_json);
  j["env"] = {{"name", c.env.name}, {"params", params}, {"world_file", c.env.world_file}};
  j["learner"] = std::string(to_string(c.learner));
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  j["epochs_per_trial"] = c.epochs_per_trial;
  j["parallel"] = c.parallel;
  j["sync_interval"] = c.sync_interval;
  j["checkpoint_every"] = c.checkpoint_every;
  j["output_dir"] = c.output_dir;
  j["actor"] = {{"explore_fraction", c.actor.explore_fraction},
                {"desire_rule", std::string(to_string(c.actor.desire_rule))},
                {"desire_floor", c.actor.desire_floor},
                {"desire_bound", c.actor.desire_bound},
                {"horizon_rule", std::string(to_string(c.actor.horizon_rule))},
                {"morethan_at_exploit", c.actor.morethan_at_exploit},
                {"greedy", c.actor.greedy},
                {"omit_horizon", c.actor.omit_horizon},
                {"command_mode", std::string(to_string(c.actor.command_mode))}};
  j["network"] = {{"head", c.network.head},
                  {"hidden", c.network.hidden},
                  {"activation", std::string(nn::to_string(c.network.activation))},
                  {"cell", std::string(nn::to_string(c.network.cell))},
                  {"hidden_dim", c.network.hidden_dim},
                  {"step_counter", c.network.step_counter},
                  {"autoregressive", c.network.autoregressive},
                  {"desire_scale", c.network.desire_scale},
                  {"init_seed", c.network.init_seed}};
  j["optimizer"] = {{"kind", std::string(nn::to_string(c.optimizer.kind))},
                    {"lr", c.optimizer.lr},
                    {"momentum", c.optimizer.momentum},
                    {"beta1", c.optimizer.beta1},
                    {"beta2", c.optimizer.beta2},
                    {"epsilon", c.optimizer.epsilon},
                    {"clip_norm", c.optimizer.clip_norm}};
  j["replay"] = {{"capacity", c.replay.capacity},
                 {"selection", std::string(to_string(c.replay.selection))},
                 {"single_life", c.replay.single_life}};
  j["batch"] = {{"batches", c.batch.batches},
                {"batch_size", c.batch.batch_size},
                {"loss", c.batch.loss},
                {"bptt_window", c.batch.bptt_window},
                {"expected_rewards", c.batch.expected_rewards}};
  j["relabel"] = {{"exact", c.relabel.exact},
                  {"morethan", c.relabel.morethan},
                  {"goal", c.relabel.goal},
                  {"fractions", c.relabel.fractions}};
  j["horizon"] = {{"kind", std::string(to_string(c.horizon.kind))},
                  {"gamma", c.horizon.gamma},
                  {"scale", c.horizon.scale}};
  return j.dump(2);
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  RunConfig c;
  Obj root(j, "");
  {
    Obj e = root.child("env");
    e.get("name", c.env.name);
    if (const json* p = e.raw("params")) {
      if (!p->is_object()) throw ConfigError("env.params", "must be a JSON object");
      c.env.params_json = p->dump();
    } else {
      c.env.params_json = "{}";
    }
    e.get("world_file", c.env.world_file);
    e.done();
  }
  root.get_enum("learner", c.learner, net_from_string);
  root.get("seed", c.seed);
  root.get("trials", c.trials);
  root.get("epochs_per_trial", c.epochs_per_trial);
  root.get("parallel", c.parallel);
  root.get("sync_interval", c.sync_interval);
  root.get("checkpoint_every", c.checkpoint_every);
  root.get("output_dir", c.output_dir);
  {
    Obj a = root.child("actor");
    a.get("explore_fraction", c.actor.explore_fraction);
    a.get_enum("desire_rule", c.actor.desire_rule, desire_rule_from_string);
    a.get("desire_floor", c.actor.desire_floor);
    a.get("desire_bound", c.actor.desire_bound);
    a.get_enum("horizon_rule", c.actor.horizon_rule, horizon_rule_from_string);
    a.get("morethan_at_exploit", c.actor.morethan_at_exploit);
    a.get("greedy", c.actor.greedy);
    a.get("omit_horizon", c.actor.omit_horizon);
    a.get_enum("command_mode", c.actor.command_mode, command_mode_from_string);
    a.done();
  }
  {
    Obj n = root.child("network");
    n.get("head", c.network.head);
    n.get("hidden", c.network.hidden);
    n.get_enum("activation", c.network.activation, nn::activation_from_string);
    n.get_enum("cell", c.network.cell, nn::cell_from_string);
    n.get("hidden_dim", c.network.hidden_dim);
    n.get("step_counter", c.network.step_counter);
    n.get("autoregressive", c.network.autoregressive);
    n.get("desire_scale", c.network.desire_scale);
    n.get("init_seed", c.network.init_seed);
    n.done();
  }
  {
    Obj o = root.child("optimizer");
    o.get_enum("kind", c.optimizer.kind, nn::optimizer_from_string);
    o.get("lr", c.optimizer.lr);
    o.get("momentum", c.optimizer.momentum);
    o.get("beta1", c.optimizer.beta1);
    o.get("beta2", c.optimizer.beta2);
    o.get("epsilon", c.optimizer.epsilon);
    o.get("clip_norm", c.optimizer.clip_norm);
    o.done();
  }
  {
    Obj r = root.child("replay");
    r.get("capacity", c.replay.capacity);
    r.get_enum("selection", c.replay.selection, selection_from_string);
    r.get("single_life", c.replay.single_life);
    r.done();
  }
  {
    Obj b = root.child("batch");
    b.get("batches", c.batch.batches);
    b.get("batch_size", c.batch.batch_size);
    b.get("loss", c.batch.loss);
    b.get("bptt_window", c.batch.bptt_window);
    b.get("expected_rewards", c.batch.expected_rewards);
    b.done();
  }
  {
    Obj r = root.child("relabel");
    r.get("exact", c.relabel.exact);
    r.get("morethan", c.relabel.morethan);
    r.get("goal", c.relabel.goal);
    r.get("fractions", c.relabel.fractions);
    r.done();
  }
  {
    Obj h = root.child("horizon");
    h.get_enum("kind", c.horizon.kind, horizon_from_string);
    h.get("gamma", c.horizon.gamma);
    h.get("scale", c.horizon.scale);
    h.done();
  }
  root.done();
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

ControllerSpec controller_spec(const RunConfig& c, const envs::EnvSpec& es) {
  ControllerSpec s;
  s.net = c.learner;
  s.layout.dims = es.dims;
  s.layout.step_counter = c.network.step_counter;
  s.layout.autoregressive = c.network.autoregressive;
  if (c.network.head == "auto") {
    s.head = es.action_kind == envs::ActionKind::continuous     ? nn::HeadKind::gaussian
             : es.action_kind == envs::ActionKind::multi_binary ? nn::HeadKind::sigmoid
                                                                 : nn::HeadKind::softmax;
  } else {
    s.head = nn::head_from_string(c.network.head);
  }
  s.hidden = c.network.hidden;
  s.activation = c.network.activation;
  s.cell = c.network.cell;
  s.hidden_dim = c.network.hidden_dim;
  s.horizon = c.horizon;
  if (s.horizon.scale == 0.0) s.horizon.scale = static_cast<double>(es.max_steps);
  s.desire_scale = c.network.desire_scale > 0.0 ? c.network.desire_scale : 1.0;
  s.step_scale = static_cast<double>(es.max_steps);
  return s;
}

BatchConfig batch_config(const RunConfig& c, const ControllerSpec& spec, const RewardTable* expected) {
  BatchConfig b;
  b.batches = c.batch.batches;
  b.batch_size = c.batch.batch_size;
  b.mix = c.relabel;
  if (c.batch.loss == "auto") {
    b.loss = spec.head == nn::HeadKind::gaussian ? nn::LossKind::gaussian_nll : nn::LossKind::crossentropy;
  } else {
    b.loss = nn::loss_from_string(c.batch.loss);
  }
  b.omit_horizon = c.actor.omit_horizon;
  b.command_mode = c.actor.command_mode;
  b.bptt_window = c.batch.bptt_window;
  b.expected_rewards = expected;
  return b;
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  CounterRng r(seed, 0x7a1a000000000000ull ^ trial);
  return r();
}

void write_metrics_header(std::ostream& out, bool recurrent) {
  out << kMetricsVersionLine << '\n' << "trial,return,desire,loss,explore_fraction";
  if (recurrent) out << ",hidden_norm";
  out << '\n';
}

void write_metrics_row(std::ostream& out, const MetricsRow& r) {
  out << r.trial << ',' << fmt(r.ret) << ',' << fmt(r.desire) << ',' << fmt(r.loss) << ',' << fmt(r.explore_fraction);
  if (r.hidden_norm) out << ',' << fmt(*r.hidden_norm);
  out << '\n';
}

std::vector<MetricsRow> read_metrics(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open metrics file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kMetricsVersionLine) {
    throw IoError(path.string() + ": missing '" + std::string(kMetricsVersionLine) + "' line");
  }
  if (!std::getline(in, line)) throw IoError(path.string() + ": missing header");
  bool recurrent = false;
  if (line == "trial,return,desire,loss,explore_fraction,hidden_norm") {
    recurrent = true;
  } else if (line != "trial,return,desire,loss,explore_fraction") {
    throw IoError(path.string() + ": unexpected header '" + line + "'");
  }
  std::vector<MetricsRow> rows;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    const std::size_t want = recurrent ? 6 : 5;
    auto bad = [&] { return IoError(path.string() + ":" + std::to_string(lineno) + ": malformed row"); };
    if (cells.size() != want) throw bad();
    auto num = [&](const std::string& s) {
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(s, &pos);
      } catch (const std::exception&) {
        throw bad();
      }
      if (pos != s.size()) throw bad();
      return v;
    };
    MetricsRow r;
    const double t = num(cells[0]);
    if (t < 0 || t != std::floor(t)) throw bad();
    r.trial = static_cast<std::size_t>(t);
    r.ret = num(cells[1]);
    r.desire = num(cells[2]);
    r.loss = num(cells[3]);
    r.explore_fraction = num(cells[4]);
    if (recurrent) r.hidden_norm = num(cells[5]);
    rows.push_back(r);
  }
  return rows;
}

namespace {

double sum(const Vec& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::uint64_t init_seed(const RunConfig& c) {
  CounterRng r(c.seed, 0x1417000000000000ull ^ c.network.init_seed);
  return r();
}

void write_stats(const RunFiles& files, const ReplayBuffer& buffer, const RelabelCounts& counts, std::size_t trials) {
  json j;
  j["trials"] = trials;
  j["best_return"] = std::isfinite(buffer.best_return()) ? buffer.best_return() : 0.0;
  j["best_length"] = buffer.best_length();
  j["episodes_added"] = buffer.total_added();
  j["relabel_counts"] = {{"exact", counts.by_kind[0]}, {"morethan", counts.by_kind[1]}, {"goal", counts.by_kind[2]}};
  std::ofstream out(files.stats(), std::ios::binary);
  if (!out) throw IoError("cannot write " + files.stats().string());
  out << j.dump(2) << '\n';
}

void add_counts(RelabelCounts& into, const RelabelCounts& c) {
  for (std::size_t i = 0; i < 3; ++i) into.by_kind[i] += c.by_kind[i];
}

// Learner side of a run: buffer, table, optimizer and the controller it trains.
struct Learner {
  const RunConfig& cfg;
  Controller controller;
  ReplayBuffer buffer;
  std::optional<RewardTable> table;
  nn::Optimizer optimizer;
  CounterRng rng;
  RelabelCounts counts;

  Learner(const RunConfig& c, Controller ctrl, const envs::EnvSpec& es)
      : cfg(c),
        controller(std::move(ctrl)),
        buffer(c.replay.capacity, c.replay.selection),
        optimizer(c.optimizer),
        rng(c.seed, 2) {
    if (c.batch.expected_rewards) table.emplace(es.num_states, es.dims.action);
  }

  void add(const Episode& ep) {
    if (cfg.replay.single_life) {
      buffer.extend_last(ep);
    } else {
      buffer.add_episode(ep);
    }
    if (table) update_reward_table(*table, ep);
    if (cfg.network.desire_scale == 0.0) controller.set_desire_scale(std::max(1.0, buffer.max_abs_return()));
  }

  double train() {
    const BatchConfig b = batch_config(cfg, controller.spec(), table ? &*table : nullptr);
    double loss = 0.0;
    for (std::size_t e = 0; e < cfg.epochs_per_trial; ++e) {
      EpochStats st;
      loss = controller.recurrent() ? train_epoch_rnn(controller, buffer, b, optimizer, rng, &st)
                                    : train_epoch(controller, buffer, b, optimizer, rng, &st);
      add_counts(counts, st.counts);
    }
    return loss;
  }
};

}  // namespace

TrainResult train_run(const RunConfig& cfg) {
  cfg.validate();
  auto env = envs::make_environment(cfg.env);
  const envs::EnvSpec& es = env->spec();
  const ControllerSpec spec = controller_spec(cfg, es);
  Learner learner(cfg, Controller(spec, init_seed(cfg)), es);

  RunFiles files{cfg.output_dir};
  std::error_code ec;
  fs::create_directories(files.dir, ec);
  if (ec) throw IoError("cannot create run directory " + files.dir.string() + ": " + ec.message());
  {
    std::ofstream c(files.config(), std::ios::binary);
    if (!c) throw IoError("cannot write " + files.config().string());
    c << config_to_json(cfg) << '\n';
  }
  std::ofstream metrics(files.metrics(), std::ios::binary);
  if (!metrics) throw IoError("cannot write " + files.metrics().string());
  const bool rnn = spec.net == NetKind::rnn;
  write_metrics_header(metrics, rnn);

  TrainResult result{learner.controller, ReplayBuffer(cfg.replay.capacity, cfg.replay.selection), {}, {}};
  CounterRng actor_rng(cfg.seed, 1);
  nn::RecurrentNet::State life;
  if (rnn) life = learner.controller.initial_state();

  auto record = [&](std::size_t trial, const TrialCommand& cmd, const RolloutResult& r, double loss) {
    MetricsRow row{trial, r.episode.return_value(), sum(cmd.desire), loss, cfg.actor.explore_fraction, std::nullopt};
    if (rnn) row.hidden_norm = r.mean_hidden_norm;
    write_metrics_row(metrics, row);
    metrics.flush();
    result.metrics.push_back(row);
  };
  auto checkpoint = [&](std::size_t trial, const Controller& c) {
    if (cfg.checkpoint_every > 0 && (trial + 1) % cfg.checkpoint_every == 0) {
      c.save(files.dir / ("trial_" + std::to_string(trial + 1) + ".ckpt"));
    }
  };
  auto act_trial = [&](const Controller& actor, const ReplayBuffer& seen, std::size_t trial) {
    const TrialCommand cmd = exploit_command(cfg.actor, seen, es);
    const std::uint64_t lived =
        cfg.replay.single_life && !seen.empty() ? seen.entries().back().episode.size() : 0;
    const RolloutOptions ro = rollout_options(cfg.actor, true, lived);
    RolloutResult r = rollout(*env, actor, cmd, ro, trial_seed(cfg.seed, trial), actor_rng,
                              rnn && cfg.replay.single_life ? &life : nullptr);
    return std::make_pair(cmd, std::move(r));
  };

  if (!cfg.parallel) {
    Controller actor = learner.controller;
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      auto [cmd, r] = act_trial(actor, learner.buffer, i);
      learner.add(r.episode);
      const double loss = learner.train();
      actor = learner.controller;  // sync every trial
      record(i, cmd, r, loss);
      checkpoint(i, learner.controller);
    }
  } else {
    // Two tasks: this thread acts, a learner thread trains. Episodes go
    // through a queue; parameters come back as whole-controller snapshots.
    std::mutex m;
    std::condition_variable cv;
    std::deque<Episode> queue;
    Controller snapshot = learner.controller;
    ReplayBuffer actor_view(cfg.replay.capacity, cfg.replay.selection);  // for the exploit command
    double last_loss = 0.0;
    bool actor_done = false;
    std::exception_ptr failure;

    std::thread learner_thread([&] {
      try {
        std::size_t epochs = 0;
        for (;;) {
          std::vector<Episode> fresh;
          bool finishing = false;
          {
            std::unique_lock lock(m);
            cv.wait(lock, [&] { return !queue.empty() || actor_done || !learner.buffer.empty(); });
            while (!queue.empty()) {
              fresh.push_back(std::move(queue.front()));
              queue.pop_front();
            }
            finishing = actor_done;
          }
          for (const auto& ep : fresh) learner.add(ep);
          if (learner.buffer.empty()) {
            if (finishing) break;
            continue;
          }
          const double loss = learner.train();
          ++epochs;
          if (epochs % cfg.sync_interval == 0 || finishing) {
            std::lock_guard lock(m);
            snapshot = learner.controller;
            last_loss = loss;
          }
          if (finishing) break;
        }
      } catch (...) {
        std::lock_guard lock(m);
        failure = std::current_exception();
      }
    });

    try {
      for (std::size_t i = 0; i < cfg.trials; ++i) {
        Controller actor;
        double loss = 0.0;
        {
          std::lock_guard lock(m);
          if (failure) break;
          actor = snapshot;
          loss = last_loss;
        }
        auto [cmd, r] = act_trial(actor, actor_view, i);
        if (cfg.replay.single_life) {
          actor_view.extend_last(r.episode);
        } else {
          actor_view.add_episode(r.episode);
        }
        {
          std::lock_guard lock(m);
          queue.push_back(r.episode);
        }
        cv.notify_one();
        record(i, cmd, r, loss);
        checkpoint(i, actor);
      }
    } catch (...) {
      {
        std::lock_guard lock(m);
        actor_done = true;
      }
      cv.notify_one();
      learner_thread.join();
      throw;
    }
    {
      std::lock_guard lock(m);
      actor_done = true;
    }
    cv.notify_one();
    learner_thread.join();
    if (failure) std::rethrow_exception(failure);
  }

  learner.controller.save(files.checkpoint());
  learner.buffer.save(files.buffer());
  write_stats(files, learner.buffer, learner.counts, cfg.trials);
  result.controller = learner.controller;
  result.buffer = learner.buffer;
  result.relabel_counts = learner.counts;
  return result;
}

bool command_satisfied(double achieved, double desire, bool morethan, double tolerance) {
  if (morethan) return achieved >= desire;
  return std::abs(achieved - desire) <= tolerance * std::abs(desire) + 1e-9;
}

EvalSummary evaluate(const Controller& controller, envs::Environment& env, const EvalRequest& req) {
  const envs::EnvSpec& es = env.spec();
  if (controller.layout().dims != es.dims) {
    throw std::invalid_argument("checkpoint dimensions (m,n,o) do not match world '" + es.name + "'");
  }
  if (req.desire.size() != es.dims.reward) throw std::invalid_argument("desire has wrong number of components");
  if (req.trials == 0) throw std::invalid_argument("eval needs at least one trial");
  TrialCommand cmd{req.desire, req.horizon_steps, req.morethan, std::nullopt};
  RolloutOptions ro;
  ro.explore = false;
  ro.greedy = req.greedy;
  ro.command_mode = req.command_mode;
  ro.omit_horizon = req.omit_horizon;
  ro.hidden_reset_step = req.hidden_reset_step;
  CounterRng rng(req.seed, 7);
  EvalSummary s;
  const double desire = sum(req.desire);
  double total = 0.0, total_sq = 0.0, ok = 0.0;
  for (std::size_t i = 0; i < req.trials; ++i) {
    const RolloutResult r = rollout(env, controller, cmd, ro, trial_seed(req.seed ^ 0xe7a1ull, i), rng);
    EvalTrial t{i, r.episode.return_value(), r.episode.size(), false};
    t.satisfied = command_satisfied(t.ret, desire, req.morethan, req.tolerance);
    total += t.ret;
    total_sq += t.ret * t.ret;
    ok += t.satisfied;
    s.trials.push_back(t);
  }
  const double n = static_cast<double>(req.trials);
  s.mean_return = total / n;
  s.std_return = std::sqrt(std::max(0.0, total_sq / n - s.mean_return * s.mean_return));
  s.satisfaction = ok / n;
  return s;
}

void write_eval_csv(const fs::path& path, const EvalSummary& summary) {
  const bool fresh = !fs::exists(path);
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot write " + path.string());
  if (fresh) out << "trial,return,steps,satisfied\n";
  for (const auto& t : summary.trials) {
    out << t.trial << ',' << fmt(t.ret) << ',' << t.steps << ',' << (t.satisfied ? 1 : 0) << '\n';
  }
}

std::size_t command_loop(const Controller& controller, envs::Environment& env, std::istream& in, std::ostream& out,
                         std::ostream& err, std::uint64_t seed, double tolerance) {
  out << "trial,desire,horizon,morethan,return,steps,satisfied" << std::endl;
  std::string line;
  std::size_t n = 0;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#') continue;
    double desire = 0.0;
    long long horizon = -1;
    bool morethan = false;
    bool ok = tok.size() == 2 || tok.size() == 3;
    if (ok) {
      try {
        std::size_t p1 = 0, p2 = 0;
        desire = std::stod(tok[0], &p1);
        horizon = std::stoll(tok[1], &p2);
        ok = p1 == tok[0].size() && p2 == tok[1].size() && horizon >= 0 && std::isfinite(desire);
      } catch (const std::exception&) {
        ok = false;
      }
      if (ok && tok.size() == 3) {
        if (tok[2] == "morethan" || tok[2] == "1") {
          morethan = true;
        } else if (tok[2] != "exact" && tok[2] != "0") {
          ok = false;
        }
      }
    }
    if (!ok) {
      err << "line " << lineno << ": expected 'desire horizon [morethan|exact]', got '" << line << "'" << std::endl;
      continue;
    }
    EvalRequest req;
    req.desire.assign(env.spec().dims.reward, desire / static_cast<double>(env.spec().dims.reward));
    req.horizon_steps = static_cast<std::size_t>(horizon);
    req.morethan = morethan;
    req.trials = 1;
    req.tolerance = tolerance;
    req.seed = trial_seed(seed, n);
    const EvalSummary s = evaluate(controller, env, req);
    const EvalTrial& t = s.trials.front();
    out << n << ',' << fmt(desire) << ',' << horizon << ',' << (morethan ? 1 : 0) << ',' << fmt(t.ret) << ','
        << t.steps << ',' << (t.satisfied ? "true" : "false") << std::endl;
    ++n;
  }
  return n;
}

namespace {

ReplayBuffer load_run_buffer(const RunFiles& files) {
  if (!fs::exists(files.buffer())) throw IoError("run has no buffer snapshot: " + files.buffer().string());
  auto eps = load_episodes(files.buffer());
  ReplayBuffer buffer(std::max<std::size_t>(eps.size(), 1));
  for (auto& e : eps) buffer.add_episode(std::move(e));
  return buffer;
}

}  // namespace

DistillReport distill_run(const fs::path& run_dir, const DistillConfig& config) {
  const RunFiles files{run_dir};
  const RunConfig cfg = load_config(files.config());
  const Controller teacher = Controller::load(files.checkpoint());
  const ReplayBuffer buffer = load_run_buffer(files);
  const auto env = envs::make_environment(cfg.env);

  const Controller cc = distill(buffer, config, teacher.spec());
  cc.save(run_dir / "cc.ckpt");

  DistillReport rep;
  const auto good = successful_episodes(buffer, config);
  rep.successful = good.size();
  rep.agreement = fidelity(cc, good, env->spec());
  std::vector<Episode> rest;
  for (const auto& e : buffer.entries()) {
    if (std::find(good.begin(), good.end(), e.episode) == good.end()) rest.push_back(e.episode);
  }
  if (!rest.empty()) rep.agreement_unsuccessful = fidelity(cc, rest, env->spec());
  rep.audit = structural_audit(cc);

  json j;
  j["successful_episodes"] = rep.successful;
  j["agreement"] = rep.agreement;
  j["agreement_unsuccessful"] = rest.empty() ? json(nullptr) : json(rep.agreement_unsuccessful);
  j["audit"] = {{"passed", rep.audit.passed},
                {"input_units", rep.audit.input_units},
                {"command_units", rep.audit.command_units},
                {"params", rep.audit.params},
                {"expected_params", rep.audit.expected_params},
                {"detail", rep.audit.detail}};
  std::ofstream out(run_dir / "distill.json", std::ios::binary);
  if (!out) throw IoError("cannot write distill report");
  out << j.dump(2) << '\n';
  return rep;
}

RunSummary inspect_run(const fs::path& run_dir) {
  if (!fs::is_directory(run_dir)) throw IoError("not a run directory: " + run_dir.string());
  const RunFiles files{run_dir};
  RunSummary s;
  if (fs::exists(files.metrics())) {
    const auto rows = read_metrics(files.metrics());
    s.metrics_rows = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) s.best_return = i == 0 ? rows[i].ret : std::max(s.best_return, rows[i].ret);
  }
  if (fs::exists(files.buffer())) {
    for (const auto& e : load_episodes(files.buffer())) {
      ++s.episodes;
      s.pairs += pair_count(e.size());
    }
  }
  if (fs::exists(files.stats())) {
    std::ifstream in(files.stats(), std::ios::binary);
    try {
      const json j = json::parse(in);
      const json& c = j.at("relabel_counts");
      s.relabel_counts.by_kind = {c.at("exact").get<std::uint64_t>(), c.at("morethan").get<std::uint64_t>(),
                                  c.at("goal").get<std::uint64_t>()};
    } catch (const json::exception& e) {
      throw IoError(files.stats().string() + ": " + e.what());
    }
  }
  if (fs::exists(files.config())) s.config_json = config_to_json(load_config(files.config()));
  return s;
}

void print_summary(std::ostream& out, const RunSummary& s) {
  const double total = static_cast<double>(s.relabel_counts.total());
  auto frac = [&](std::size_t i) { return total > 0 ? static_cast<double>(s.relabel_counts.by_kind[i]) / total : 0.0; };
  out << "best_return: " << fmt(s.best_return) << '\n'
      << "trials: " << s.metrics_rows << '\n'
      << "episodes: " << s.episodes << '\n'
      << "pairs: " << s.pairs << '\n'
      << "relabel_samples: " << s.relabel_counts.total() << '\n'
      << "relabel_mix: exact=" << fmt(frac(0)) << " morethan=" << fmt(frac(1)) << " goal=" << fmt(frac(2)) << '\n'
      << "config:\n"
      << (s.config_json.empty() ? std::string("{}") : s.config_json) << '\n';
}

}  // namespace udrl
