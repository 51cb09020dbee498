#include <cmath>

#include "doctest.h"
#include "pcgswarm/agents.hpp"
#include "pcgswarm/env.hpp"
#include "support/oracles.hpp"

using namespace pcgswarm;

namespace {

EnvConfig binary(int width, int agents = 1) {
  EnvConfig c;
  c.domain = Domain::Binary;
  c.max_width = width;
  c.n_agents = agents;
  return c;
}

std::vector<Action> random_joint(const EnvConfig& c, RngStream& rng) {
  std::vector<Action> a;
  for (int i = 0; i < c.n_agents; ++i) a.push_back(random_policy(c.domain, rng));
  return a;
}

}  // namespace

TEST_SUITE("env") {
  TEST_CASE("action encoding") {
    CHECK(action_count(Domain::Binary) == 6);
    CHECK(action_count(Domain::Dungeon) == 10);
    CHECK(Action::move(Move::West).index() == 3);
    CHECK(Action::place(Tile::Air).index() == 4);
    CHECK(Action::place(Tile::Wall).index() == 5);
    CHECK(Action::place(Tile::Enemy).index() == 9);
    CHECK(Action(7).tile() == Tile::Key);
  }

  TEST_CASE("config validation") {
    auto c = binary(8);
    CHECK_NOTHROW(c.validate());
    c.n_agents = 9;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("n_agents"), std::invalid_argument);
    c = binary(8);
    c.obs_window = 4;
    CHECK_NOTHROW(c.validate());
    c.obs_window = 2;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = binary(8);
    c.reward_freq = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = binary(8);
    c.max_board_scans = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = binary(8);
    c.obs_window = kFullWindow;
    CHECK(c.window() == 15);
  }

  TEST_CASE("budget") {
    auto c = binary(16);
    CHECK(episode_budget(c, {16, 16, 16}) == 512);
    c.max_board_scans = 0.5;
    CHECK(episode_budget(c, {16, 16, 16}) == 256);
    c.max_board_scans = 0.25;
    CHECK(episode_budget(c, {3, 5, 16}) == 7);
    c.max_board_scans = 0.01;
    CHECK_THROWS_AS(episode_budget(c, {3, 3, 16}), std::invalid_argument);
  }

  TEST_CASE("reset is deterministic and in bounds") {
    auto c = binary(8, 3);
    c.randomize_shape = true;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto a = reset(c, seed), b = reset(c, seed);
      REQUIRE(a.state == b.state);
      REQUIRE(a.observations.size() == 3);
      for (auto p : a.state.positions) REQUIRE(a.state.grid.in_bounds(p.row, p.col));
      REQUIRE(a.state.budget == episode_budget(c, a.state.shape));
    }
  }

  TEST_CASE("conflicts resolve to the highest agent index") {
    auto c = binary(5, 2);
    auto s = reset_state(c, 1);
    s.positions = {{2, 2}, {2, 2}};
    const std::array<Action, 2> a{Action::place(Tile::Wall), Action::place(Tile::Air)};
    advance(s, a, c);
    CHECK(s.grid.at(2, 2) == Tile::Air);
    const std::array<Action, 2> b{Action::place(Tile::Air), Action::place(Tile::Wall)};
    advance(s, b, c);
    CHECK(s.grid.at(2, 2) == Tile::Wall);
  }

  TEST_CASE("moves clamp and never edit") {
    auto c = binary(4);
    auto s = reset_state(c, 3);
    s.positions = {{0, 0}};
    const Grid before = s.grid;
    for (Move m : {Move::North, Move::West}) {
      const std::array<Action, 1> a{Action::move(m)};
      advance(s, a, c);
      CHECK(s.positions[0] == Cell{0, 0});
    }
    for (Move m : {Move::South, Move::East}) {
      const std::array<Action, 1> a{Action::move(m)};
      advance(s, a, c);
    }
    CHECK(s.positions[0] == Cell{1, 1});
    CHECK(s.grid == before);
  }

  TEST_CASE("place changes at most one cell") {
    auto c = binary(8, 1);
    RngStream rng(8);
    auto s = reset_state(c, 8);
    for (int t = 0; t < 100; ++t) {
      const Grid before = s.grid;
      const auto a = random_joint(c, rng);
      advance(s, a, c);
      int diff = 0;
      for (int i = 0; i < before.size(); ++i) diff += before[i] != s.grid[i];
      REQUIRE(diff <= (a[0].is_move() ? 0 : 1));
    }
  }

  TEST_CASE("invalid actions") {
    auto c = binary(5, 2);
    auto s = reset_state(c, 0);
    const std::array<Action, 1> one{Action(0)};
    CHECK_THROWS_AS(advance(s, one, c), std::invalid_argument);
    const std::array<Action, 2> bad{Action(0), Action::place(Tile::Key)};
    CHECK_THROWS_AS(advance(s, bad, c), std::invalid_argument);
  }

  TEST_CASE("episode length equals budget and stepping past done throws") {
    auto c = binary(4, 2);
    c.max_board_scans = 1.5;
    RngStream rng(1);
    auto s = reset_state(c, 4);
    int steps = 0;
    while (!s.done()) {
      advance(s, random_joint(c, rng), c);
      ++steps;
    }
    CHECK(steps == 48);
    CHECK_THROWS_AS(advance(s, random_joint(c, rng), c), std::logic_error);
  }

  TEST_CASE("reward gating with freq 3") {
    auto c = binary(6, 2);
    c.reward_freq = 3;
    RngStream rng(12);
    auto s = reset_state(c, 12);
    const double l0 = current_loss(s);
    std::array<double, 3> r{};
    for (int t = 0; t < 3; ++t) r[static_cast<std::size_t>(t)] = advance(s, random_joint(c, rng), c).reward;
    CHECK(r[0] == 0.0);
    CHECK(r[1] == 0.0);
    const double l3 = loss(compute_metrics(s.grid), s.targets, s.weights);
    CHECK(r[2] == l0 - l3);
    CHECK(s.last_metrics == compute_metrics(s.grid));
  }

  TEST_CASE("episode reward telescopes and ends with a flush") {
    for (int freq : {1, 2, 7}) {
      auto c = binary(5, 2);
      c.reward_freq = freq;
      c.max_board_scans = 0.7;
      c.randomize_shape = true;
      RngStream rng(static_cast<std::uint64_t>(freq));
      for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto s = reset_state(c, seed);
        const double l0 = current_loss(s);
        double sum = 0;
        int computations = 0;
        while (!s.done()) {
          const auto o = advance(s, random_joint(c, rng), c);
          sum += o.reward;
          computations += o.computed_reward;
          if (o.done) REQUIRE(o.computed_reward);
        }
        REQUIRE(sum == l0 - current_loss(s));
        REQUIRE(computations == (s.budget + freq - 1) / freq);
      }
    }
  }

  TEST_CASE("observation geometry") {
    auto c = binary(16, 2);
    SUBCASE("corner 3x3 has 5 border cells") {
      auto s = reset_state(c, 0);
      s.positions[0] = {0, 0};
      const auto o = observe(s, 0, c);
      int border = 0;
      for (int r = 0; r < 3; ++r)
        for (int col = 0; col < 3; ++col) border += o.tile(r, col) == Tile::Border;
      CHECK(border == 5);
      CHECK(o.tile(1, 1) == s.grid.at(0, 0));
      CHECK(o.tile(2, 2) == s.grid.at(1, 1));
    }
    SUBCASE("own mask is centred, other agents rotate") {
      c.n_agents = 3;
      c.obs_window = 5;
      auto s = reset_state(c, 0);
      s.positions = {{5, 5}, {6, 5}, {12, 12}};
      for (int id = 0; id < 3; ++id) {
        const auto o = observe(s, id, c);
        CHECK(o.mask(2, 2, 0) == 1);
        CHECK(o.mask_sum(0) == 1);
      }
      const auto o0 = observe(s, 0, c);
      CHECK(o0.mask(3, 2, 1) == 1);
      CHECK(o0.mask_sum(2) == 0);
      const auto o1 = observe(s, 1, c);
      CHECK(o1.mask_sum(1) == 0);
      CHECK(o1.mask(1, 2, 2) == 1);
    }
    SUBCASE("even window puts the agent at offset w/2") {
      c.obs_window = 4;
      auto s = reset_state(c, 0);
      s.positions[0] = {5, 5};
      const auto o = observe(s, 0, c);
      CHECK(o.mask(2, 2, 0) == 1);
      CHECK(o.tile(0, 0) == s.grid.at(3, 3));
      CHECK(o.tile(3, 3) == s.grid.at(6, 6));
    }
    SUBCASE("full window sees the map from anywhere") {
      c.obs_window = kFullWindow;
      auto s = reset_state(c, 0);
      for (int r = 0; r < 16; r += 5) {
        for (int col = 0; col < 16; col += 3) {
          s.positions[0] = {r, col};
          const auto o = observe(s, 0, c);
          REQUIRE(o.window == 31);
          int inside = 0;
          for (int i = 0; i < 31; ++i)
            for (int j = 0; j < 31; ++j) inside += o.tile(i, j) != Tile::Border;
          REQUIRE(inside == 256);
        }
      }
    }
  }

  TEST_CASE("replay from the action log is bit identical") {
    auto c = binary(6, 3);
    c.reward_freq = 2;
    RngStream rng(31);
    auto s = reset_state(c, 31);
    std::vector<std::vector<Action>> log;
    std::vector<double> rewards;
    while (!s.done()) {
      log.push_back(random_joint(c, rng));
      rewards.push_back(advance(s, log.back(), c).reward);
    }
    auto s2 = reset_state(c, 31);
    for (std::size_t t = 0; t < log.size(); ++t) REQUIRE(advance(s2, log[t], c).reward == rewards[t]);
    CHECK(s2 == s);
  }
}
