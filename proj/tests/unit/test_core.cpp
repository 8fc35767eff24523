#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "doctest.h"
#include "udrl/command.hpp"
#include "udrl/episode.hpp"
#include "udrl/episode_io.hpp"
#include "udrl/errors.hpp"
#include "udrl/relabel.hpp"
#include "udrl/rng.hpp"

using namespace udrl;

namespace {

// Scalar-reward episode over 1-d observations [t] with one-hot 2-action
// moves: action index alternates 0, 1, 0, ...
Episode make_episode(const std::vector<double>& rewards) {
  const Dims dims{1, 1, 2};
  EpisodeRecorder rec("test", 3, dims, {0.0});
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    rec.record(one_hot(t % 2, 2), {rewards[t]}, {static_cast<double>(t + 1)});
  }
  return std::move(rec).finish();
}

}  // namespace

TEST_CASE("counter rng is a pure function of seed, stream and position") {
  CounterRng a(42, 7), b(42, 7), c(42, 8);
  std::vector<std::uint64_t> xa, xb, xc;
  for (int i = 0; i < 10; ++i) {
    xa.push_back(a());
    xb.push_back(b());
    xc.push_back(c());
  }
  CHECK(xa == xb);
  CHECK(xa != xc);
  CHECK(counter_uniform(1, 5, 9) == counter_uniform(1, 5, 9));
  CHECK(counter_uniform(1, 5, 9) != counter_uniform(1, 6, 9));
}

TEST_CASE("philox matches the Random123 known-answer vector") {
  // Philox4x32-10, counter and key all zero.
  const auto out = philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);
}

TEST_CASE("uniform draws stay in range and have the right mean") {
  CounterRng r(1);
  double sum = 0.0;
  std::set<std::size_t> seen;
  for (int i = 0; i < 20000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    seen.insert(r.uniform_index(5));
  }
  CHECK(sum / 20000 == doctest::Approx(0.5).epsilon(0.02));
  CHECK(seen == std::set<std::size_t>{0, 1, 2, 3, 4});
}

TEST_CASE("episode accessors follow the reward-with-its-step convention") {
  const Episode ep = make_episode({1.0, 0.0, 2.0});
  CHECK(ep.size() == 3);
  CHECK(ep.step(1).prev_action == Vec{0.0, 0.0});
  CHECK(ep.step(2).prev_action == Vec{1.0, 0.0});
  CHECK(ep.input_reward(1) == Vec{0.0});
  CHECK(ep.input_reward(2) == Vec{1.0});
  CHECK(ep.observation(4) == Vec{3.0});
  CHECK(ep.total_reward() == Vec{3.0});
  CHECK(ep.return_value() == 3.0);
  CHECK_THROWS_AS(ep.step(0), std::out_of_range);
  CHECK_THROWS_AS(ep.step(4), std::out_of_range);
}

TEST_CASE("episode rejects inconsistent transitions") {
  const Dims dims{1, 1, 2};
  std::vector<Transition> tr = {{{0, 0}, {0}, {1}, {1, 0}}, {{0, 1}, {1}, {1}, {0, 1}}};
  CHECK_THROWS_AS(Episode("x", 0, dims, tr, {2}), std::invalid_argument);
  tr[1].prev_action = {1, 0};
  CHECK_NOTHROW(Episode("x", 0, dims, tr, {2}));
  tr[0].reward = {1, 2};
  CHECK_THROWS_AS(Episode("x", 0, dims, tr, {2}), std::invalid_argument);
}

TEST_CASE("argmax breaks ties toward the lowest index") {
  CHECK(argmax(Vec{0.2, 0.5, 0.5}) == 1);
  CHECK(argmax(Vec{0.0, 0.0, 0.0}) == 0);
}

TEST_CASE("horizon encodings") {
  HorizonScheme id;
  CHECK(encode_horizon(0, id) == Vec{0.0});
  CHECK(encode_horizon(7, id) == Vec{7.0});
  HorizonScheme scaled{HorizonKind::identity, 0.9, 50.0};
  CHECK(encode_horizon(10, scaled)[0] == doctest::Approx(0.2));
  HorizonScheme harm{HorizonKind::harmonic, 0.9, 1.0};
  CHECK(encode_horizon(3, harm)[0] == doctest::Approx(1.0 + 0.5 + 1.0 / 3.0));
  HorizonScheme disc{HorizonKind::discounted, 0.5, 1.0};
  // sum tau * 0.5^tau for tau = 1..3 = 0.5 + 0.5 + 0.375
  CHECK(encode_horizon(3, disc)[0] == doctest::Approx(1.375));
  // Bounded by gamma / (1 - gamma)^2 = 2.
  CHECK(encode_horizon(200, disc)[0] < 2.0 + 1e-12);
  CHECK_THROWS_AS((HorizonScheme{HorizonKind::discounted, 1.0, 1.0}.validate()), std::invalid_argument);
}

TEST_CASE("null command zeroes horizon, desire and extra") {
  const Command c = null_command(2);
  CHECK(c.horizon == Vec{0.0});
  CHECK(c.desire == Vec{0.0, 0.0});
  CHECK_FALSE(c.marker);
  CHECK_FALSE(c.morethan);
  CHECK_FALSE(c.goal_obs.has_value());
}

TEST_CASE("segment relabeling recomputes desire from raw rewards") {
  const Episode ep = make_episode({1.0, 0.0, 2.0, -1.0});
  const HorizonScheme id;
  for (std::size_t k = 1; k <= ep.size(); ++k) {
    for (std::size_t j = k; j <= ep.size(); ++j) {
      const SegmentSample s = relabel_segment(ep, k, j, id);
      double want = 0.0;
      for (std::size_t t = k; t <= j; ++t) want += ep.transitions()[t - 1].reward[0];
      CHECK(s.command.desire[0] == doctest::Approx(want));
      CHECK(s.command.horizon == Vec{static_cast<double>(j - k)});
      CHECK(s.target_action == ep.step(k).action);
      CHECK(s.history_prefix_len == k - 1);
      CHECK(s.command.marker);
    }
  }
  CHECK(relabel_segment(ep, 1, 4, id).command.desire == Vec{2.0});
  CHECK(relabel_segment(ep, 2, 3, id).command.desire == Vec{2.0});
  CHECK_THROWS_AS(relabel_segment(ep, 3, 2, id), std::out_of_range);
  CHECK_THROWS_AS(relabel_segment(ep, 1, 5, id), std::out_of_range);
}

TEST_CASE("morethan desire never exceeds the achieved reward") {
  CHECK(morethan_desire(Vec{4.0}, 0.5) == Vec{2.0});
  CHECK(morethan_desire(Vec{-4.0}, 0.5)[0] == doctest::Approx(-6.0));
  const Episode ep = make_episode({1.0, 0.0, 2.0});
  const SegmentSample s = relabel_morethan(ep, 1, 3, 0.75, HorizonScheme{});
  CHECK(s.command.morethan);
  CHECK(s.command.desire[0] == doctest::Approx(2.25));
  CHECK(s.kind == RelabelKind::morethan);
}

TEST_CASE("goal relabeling uses the observation after the segment") {
  const Episode ep = make_episode({1.0, 0.0, 2.0});
  const SegmentSample s = relabel_goal(ep, 1, 2, HorizonScheme{});
  REQUIRE(s.command.goal_obs.has_value());
  CHECK(*s.command.goal_obs == Vec{2.0});
  CHECK(relabel_goal(ep, 3, 3, HorizonScheme{}).command.goal_obs == Vec{3.0});
}

TEST_CASE("episode json lines round-trip") {
  const Episode ep = make_episode({1.5, -0.25, 2.0});
  const std::string line = episode_to_json_line(ep);
  CHECK(line.find('\n') == std::string::npos);
  CHECK(episode_from_json_line(line) == ep);

  const auto dir = std::filesystem::temp_directory_path() / "udrl_core_io";
  std::filesystem::create_directories(dir);
  const std::vector<Episode> eps = {ep, make_episode({0.0})};
  save_episodes(dir / "e.jsonl", eps);
  CHECK(load_episodes(dir / "e.jsonl") == eps);
  CHECK_THROWS_AS(episode_from_json_line("{\"env_id\":1}"), IoError);
  CHECK_THROWS_AS(episode_from_json_line("not json"), IoError);
  CHECK_THROWS_AS(load_episodes(dir / "missing.jsonl"), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("worked examples: horizons, segment sums, morethan fractions") {
  CHECK(encode_horizon(2, HorizonScheme{HorizonKind::discounted, 0.5, 1.0})[0] == doctest::Approx(1.0));
  CHECK(encode_horizon(3, HorizonScheme{HorizonKind::harmonic, 0.9, 1.0})[0] == doctest::Approx(11.0 / 6.0));
  const Episode ep = make_episode({1.0, 0.0, 2.0});
  const SegmentSample whole = relabel_segment(ep, 1, 3, HorizonScheme{});
  CHECK(whole.command.desire == Vec{3.0});
  CHECK(whole.command.raw_steps == 2);
  const SegmentSample first = relabel_segment(ep, 1, 1, HorizonScheme{});
  CHECK(first.command.desire == Vec{1.0});
  CHECK(first.command.raw_steps == 0);
  CHECK(morethan_desire(Vec{8.0}, 7.0 / 8.0) == Vec{7.0});
}
