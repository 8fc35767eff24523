#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "udrl/envs/worlds.hpp"
#include "udrl/errors.hpp"
#include "udrl/run.hpp"

using namespace udrl;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("udrl_test_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig small_run(const std::string& name, NetKind learner = NetKind::ffw) {
  RunConfig c;
  c.env.name = learner == NetKind::rnn ? "tmaze" : "grid_world";
  c.learner = learner;
  c.trials = 6;
  c.network.hidden = {8};
  c.network.hidden_dim = 6;
  c.batch.batches = 2;
  c.batch.batch_size = 8;
  c.output_dir = fresh_dir(name).string();
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config JSON round-trips") {
  RunConfig c;
  c.seed = 42;
  c.actor.explore_fraction = 0.35;
  c.relabel = RelabelMix{0.5, 0.5, 0.0, {0.5}};
  c.horizon.kind = HorizonKind::harmonic;
  c.replay.selection = SelectionPolicy::top_k_by_return;
  c.network.hidden = {7, 5};
  CHECK(config_from_json(config_to_json(c)) == c);
  CHECK(config_from_json("{}") == RunConfig{});
}

TEST_CASE("config errors name the offending field") {
  auto field_of = [](const std::string& text) {
    try {
      config_from_json(text).validate();
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  CHECK(field_of(R"({"actor": {"explore_fraction": 1.5}})") == "actor.explore_fraction");
  CHECK(field_of(R"({"actor": {"explor_fraction": 0.1}})") == "actor.explor_fraction");
  CHECK(field_of(R"({"trials": "many"})") == "trials");
  CHECK(field_of(R"({"relabel": {"exact": 0.5}})").rfind("relabel", 0) == 0);
  CHECK(field_of(R"({"env": {"name": "nowhere"}})").rfind("env", 0) == 0);
  CHECK(field_of(R"({"learner": "transformer"})") == "learner");
  CHECK_THROWS_AS(config_from_json("{not json"), ConfigError);
}

TEST_CASE("metrics files: header, rows, validation") {
  const fs::path dir = fresh_dir("metrics");
  fs::create_directories(dir);
  const fs::path p = dir / "metrics.csv";
  {
    std::ofstream out(p);
    write_metrics_header(out, true);
    write_metrics_row(out, {1, 2.5, 5.0, 0.25, 0.2, 1.5});
  }
  const std::string text = slurp(p);
  CHECK(text.rfind("# metrics v1\ntrial,return,desire,loss,explore_fraction,hidden_norm\n", 0) == 0);
  const auto rows = read_metrics(p);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].ret == 2.5);
  CHECK(rows[0].hidden_norm == 1.5);
  {
    std::ofstream out(p);
    out << "trial,return\n1,2\n";
  }
  CHECK_THROWS_AS(read_metrics(p), IoError);
  {
    std::ofstream out(p);
    write_metrics_header(out, false);
    out << "1,abc,0,0,0\n";
  }
  CHECK_THROWS_AS(read_metrics(p), IoError);
}

TEST_CASE("command satisfaction") {
  CHECK(command_satisfied(9.5, 10.0, false, 0.1));
  CHECK_FALSE(command_satisfied(8.9, 10.0, false, 0.1));
  CHECK(command_satisfied(0.0, 0.0, false, 0.0));
  CHECK(command_satisfied(12.0, 10.0, true, 0.0));
  CHECK_FALSE(command_satisfied(9.99, 10.0, true, 0.5));
}

TEST_CASE("a small run writes its directory and is reproducible") {
  RunConfig c = small_run("train_a");
  const TrainResult a = train_run(c);
  const RunFiles files{c.output_dir};
  for (const auto& p : {files.config(), files.metrics(), files.checkpoint(), files.buffer(), files.stats()}) {
    CHECK(fs::exists(p));
  }
  CHECK(a.metrics.size() == 6);
  CHECK(read_metrics(files.metrics()).size() == 6);
  CHECK(load_config(files.config()) == c);
  const std::string first = slurp(files.metrics());
  const TrainResult b = train_run(c);
  CHECK(slurp(files.metrics()) == first);
  CHECK(b.controller == a.controller);
  CHECK(Controller::load(files.checkpoint()) == a.controller);

  const RunSummary s = inspect_run(c.output_dir);
  CHECK(s.metrics_rows == 6);
  CHECK(s.episodes == a.buffer.size());
  CHECK(s.relabel_counts.total() == 6 * 2 * 8);
  std::ostringstream out;
  print_summary(out, s);
  CHECK(out.str().find("pairs: ") != std::string::npos);
}

TEST_CASE("recurrent runs record hidden norms") {
  RunConfig c = small_run("train_rnn", NetKind::rnn);
  const TrainResult r = train_run(c);
  for (const auto& row : r.metrics) CHECK(row.hidden_norm.has_value());
}

TEST_CASE("evaluation and the command loop") {
  RunConfig c = small_run("eval");
  const TrainResult r = train_run(c);
  envs::GridWorld g = envs::GridWorld::default_grid();
  EvalRequest req;
  req.desire = {5.0};
  req.horizon_steps = 20;
  req.trials = 7;
  const EvalSummary s = evaluate(r.controller, g, req);
  CHECK(s.trials.size() == 7);
  CHECK(evaluate(r.controller, g, req).mean_return == s.mean_return);

  std::istringstream in("5 20\nnot a command\n9.3 8 morethan\n1 3 exact\n");
  std::ostringstream out, err;
  CHECK(command_loop(r.controller, g, in, out, err, 0) == 3);
  std::size_t lines = 0;
  std::istringstream o(out.str());
  for (std::string l; std::getline(o, l);) ++lines;
  CHECK(lines == 4);
  CHECK(err.str().find("line 2") != std::string::npos);

  std::istringstream empty("");
  std::ostringstream out2, err2;
  CHECK(command_loop(r.controller, g, empty, out2, err2, 0) == 0);
  CHECK(out2.str() == "trial,desire,horizon,morethan,return,steps,satisfied\n");

  envs::TMaze t;
  CHECK_THROWS_AS(evaluate(r.controller, t, req), std::invalid_argument);
}

TEST_CASE("inspect: empty directory, corrupted files, missing directory") {
  const fs::path dir = fresh_dir("inspect");
  fs::create_directories(dir);
  const RunSummary s = inspect_run(dir);
  CHECK(s.metrics_rows == 0);
  CHECK(s.episodes == 0);
  CHECK(s.pairs == 0);
  {
    std::ofstream out(dir / "metrics.csv");
    out << "garbage\n";
  }
  CHECK_THROWS_AS(inspect_run(dir), IoError);
  CHECK_THROWS_AS(inspect_run(dir / "nope"), IoError);
}

TEST_CASE("distilling a run without a buffer or successes fails cleanly") {
  const fs::path dir = fresh_dir("distill_empty");
  fs::create_directories(dir);
  CHECK_THROWS_AS(distill_run(dir, DistillConfig{}), IoError);

  RunConfig c = small_run("distill");
  train_run(c);
  DistillConfig cfg;
  cfg.rule = SuccessRule::threshold;
  cfg.threshold = 1e9;
  CHECK_THROWS_AS(distill_run(c.output_dir, cfg), NothingToDistillError);
  cfg.threshold = -1e9;
  cfg.steps = 5;
  const DistillReport rep = distill_run(c.output_dir, cfg);
  CHECK(rep.audit.passed);
  CHECK(fs::exists(fs::path(c.output_dir) / "cc.ckpt"));
  CHECK(fs::exists(fs::path(c.output_dir) / "distill.json"));
}

TEST_CASE("best return in the summary is the maximum over the metrics file") {
  RunConfig c = small_run("best");
  c.trials = 200;
  train_run(c);
  double best = -1e300;
  for (const auto& row : read_metrics(RunFiles{c.output_dir}.metrics())) best = std::max(best, row.ret);
  CHECK(inspect_run(c.output_dir).best_return == best);
  // Distill report keeps the unsuccessful-episode agreement as a diagnostic.
  DistillConfig cfg;
  cfg.rule = SuccessRule::threshold;
  cfg.threshold = 0.0;
  cfg.steps = 20;
  const DistillReport rep = distill_run(c.output_dir, cfg);
  CHECK(rep.agreement_unsuccessful >= 0.0);
  CHECK(rep.agreement_unsuccessful <= 1.0);
}

TEST_CASE("command loop reports extrapolated desires without failing") {
  RunConfig c = small_run("extrapolate");
  const TrainResult r = train_run(c);
  envs::GridWorld g = envs::GridWorld::default_grid();
  std::istringstream in("1000 30\n");
  std::ostringstream out, err;
  CHECK(command_loop(r.controller, g, in, out, err, 0) == 1);
  CHECK(out.str().find("\n0,1000,30,0,") != std::string::npos);
  CHECK(err.str().empty());
}
