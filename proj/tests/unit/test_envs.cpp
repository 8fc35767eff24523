#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "udrl/envs/registry.hpp"
#include "udrl/envs/worlds.hpp"
#include "udrl/errors.hpp"

using namespace udrl;
using namespace udrl::envs;

namespace {

double run_actions(Environment& env, std::uint64_t seed, const std::vector<std::size_t>& actions) {
  env.reset(seed);
  double total = 0.0;
  for (std::size_t a : actions) {
    if (env.done()) break;
    total += env.step(one_hot(a, env.spec().dims.action)).reward[0];
  }
  return total;
}

}  // namespace

TEST_CASE("grid world: shortest path return and step limit") {
  GridWorld g = GridWorld::default_grid();
  CHECK(g.spec().dims == Dims{25, 1, 4});
  const auto path = g.shortest_path(g.map().starts[0]);
  CHECK(path.size() == 8);
  CHECK(run_actions(g, 0, path) == doctest::Approx(9.3));
  CHECK(g.done());
  CHECK_THROWS_AS(g.step(one_hot(0, 4)), std::logic_error);

  // Bumping into the top wall forever ends at the step limit.
  g.reset(0);
  std::size_t steps = 0;
  while (!g.done()) {
    const auto r = g.step(one_hot(0, 4));
    CHECK(r.reward[0] == doctest::Approx(-0.1));
    ++steps;
  }
  CHECK(steps == g.spec().max_steps);
}

TEST_CASE("grid world rejects illegal actions") {
  GridWorld g = GridWorld::default_grid();
  g.reset(0);
  CHECK_THROWS_AS(g.step(Vec{1.0, 1.0, 0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(g.step(Vec{1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(g.step(Vec{0.5, 0.5, 0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("fork world has two equal-return routes") {
  GridWorld f = GridWorld::default_fork();
  // right, then up-around or down-around the wall.
  const double up = run_actions(f, 0, {3, 0, 3, 3, 1, 3});
  const double down = run_actions(f, 0, {3, 1, 3, 3, 0, 3});
  CHECK(up == doctest::Approx(down));
  CHECK(up == doctest::Approx(10.0 - 0.5));
}

TEST_CASE("multi-start grid cycles through its start cells by seed") {
  GridWorld m = GridWorld::multi_start();
  CHECK(m.map().starts.size() == 4);
  std::set<std::size_t> starts;
  for (std::uint64_t s = 0; s < 4; ++s) {
    m.reset(s);
    starts.insert(m.cell());
  }
  CHECK(starts.size() == 4);
}

TEST_CASE("obstacle line pays only near either end") {
  ObstacleLine o;
  CHECK(o.reward_for(0.0) == 10.0);
  CHECK(o.reward_for(1.0) == 10.0);
  CHECK(o.reward_for(0.5) == 0.0);
  o.reset(0);
  const auto r = o.step(Vec{0.05});
  CHECK(r.done);
  CHECK(r.reward[0] == 10.0);
  o.reset(0);
  CHECK_THROWS_AS(o.step(Vec{1.5}), std::invalid_argument);
}

TEST_CASE("t-maze cue is visible only at the start") {
  TMaze t(4);
  CHECK_FALSE(t.spec().markovian);
  std::size_t up = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) up += TMaze::goal_is_up(seed);
  CHECK(up > 900);
  CHECK(up < 1100);

  for (std::uint64_t seed : {0ull, 1ull, 2ull, 3ull}) {
    const Vec first = t.reset(seed);
    CHECK(first[0] + first[1] == 1.0);
    CHECK(first[0] == (TMaze::goal_is_up(seed) ? 1.0 : 0.0));
    double total = 0.0;
    std::size_t steps = 0;
    while (!t.done()) {
      const std::size_t a = TMaze::goal_is_up(seed) ? 0 : 1;
      const auto r = t.step(one_hot(a, 2));
      if (!r.done) {
        CHECK(r.observation[0] == 0.0);
        CHECK(r.observation[1] == 0.0);
      }
      total += r.reward[0];
      ++steps;
    }
    CHECK(steps == 5);
    CHECK(total == 1.0);
  }
}

TEST_CASE("stochastic grid rewards converge to the configured means") {
  StochasticGrid g = StochasticGrid::default_world();
  g.set_distribution(0, 0, TwoPointReward{0.0, 1.0, 0.5});
  CHECK(g.true_mean(0, 0) == doctest::Approx(0.5));
  CHECK(g.true_mean(1, 1) == doctest::Approx(1.0));
  // Same seed, same rewards.
  auto rewards = [&](std::uint64_t seed) {
    std::vector<double> out;
    g.reset(seed);
    for (int i = 0; i < 10; ++i) out.push_back(g.step(one_hot(i % 4, 4)).reward[0]);
    return out;
  };
  CHECK(rewards(5) == rewards(5));
}

TEST_CASE("twin bits and null world") {
  TwinBits tb(2);
  tb.reset(0);
  CHECK(tb.step(Vec{1.0, 1.0}).reward[0] == 1.0);
  tb.reset(0);
  CHECK(tb.step(Vec{0.0, 1.0}).reward[0] == 0.0);
  tb.reset(0);
  CHECK_THROWS_AS(tb.step(Vec{0.5, 1.0}), std::invalid_argument);
  NullWorld n;
  n.reset(0);
  const auto r = n.step(Vec{1.0});
  CHECK(r.done);
  CHECK(r.reward[0] == 0.0);
}

TEST_CASE("registry builds every named world and names bad parameters") {
  for (const auto& name : environment_names()) {
    const auto env = make_environment({name, "{}", ""});
    CHECK(env->spec().name == name);
  }
  try {
    make_environment({"grid_world", "{\"step_rewrd\": 1}", ""});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "env.params.step_rewrd");
  }
  CHECK_THROWS_AS(make_environment({"no_such_world", "{}", ""}), ConfigError);
  CHECK_THROWS_AS(make_environment({"grid_world", "[1]", ""}), ConfigError);
}

TEST_CASE("world files: map rows, separator, parameter block") {
  const auto wf = parse_world_text("S..\n.#.\n..G\n---\n{\"goal_reward\": 5}\n");
  CHECK(wf.rows.size() == 3);
  const auto path = std::filesystem::temp_directory_path() / "udrl_world.txt";
  {
    std::ofstream out(path);
    out << "S..\n.#.\n..G\n---\n{\"goal_reward\": 5, \"max_steps\": 9}\n";
  }
  const auto env = make_environment({"grid_world", "{\"max_steps\": 7}", path.string()});
  CHECK(env->spec().dims.obs == 9);
  CHECK(env->spec().max_steps == 7);  // config overrides the file
  auto* g = dynamic_cast<GridWorld*>(env.get());
  REQUIRE(g);
  CHECK(g->params().goal_reward == 5.0);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(make_environment({"grid_world", "{}", "/nonexistent/world.txt"}), IoError);
}

TEST_CASE("reset fixtures: fork start cell and t-maze entry") {
  GridWorld f = GridWorld::default_fork();
  const Vec obs = f.reset(0);
  CHECK(obs == one_hot(5, 15));  // 'A' is row 1, column 0 of a 3x5 map
  TMaze t(4);
  for (std::uint64_t s = 0; s < 8; ++s) {
    const Vec o = t.reset(s);
    CHECK(t.position() == 0);
    CHECK(t.goal_up() == TMaze::goal_is_up(s));
    CHECK(o[TMaze::goal_is_up(s) ? 0 : 1] == 1.0);
  }
}

TEST_CASE("stochastic grid: one pair sampled 10000 times averages to its configured mean") {
  StochasticGrid g = StochasticGrid::default_world();
  g.set_distribution(0, 1, TwoPointReward{-1.0, 3.0, 0.3});  // mean 0.2
  double total = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    g.reset(std::uint64_t(i));
    total += g.step(one_hot(1, 4)).reward[0];
  }
  CHECK(std::abs(total / n - g.true_mean(0, 1)) < 0.05);
}
