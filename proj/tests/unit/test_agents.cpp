#include <set>

#include "doctest.h"
#include "pcgswarm/agents.hpp"
#include "pcgswarm/env.hpp"
#include "support/oracles.hpp"

using namespace pcgswarm;

namespace {

EnvState fixture(const Grid& g, Cell pos) {
  EnvConfig c;
  c.max_width = std::max(g.height(), g.width());
  c.domain = g.domain();
  auto s = reset_state(c, 0);
  s.grid = g;
  s.shape = {g.height(), g.width(), c.max_width};
  s.targets = default_targets(g.domain(), s.shape);
  s.positions = {pos};
  s.last_metrics = compute_metrics(g);
  return s;
}

// Loss after applying action `a` for agent 0 alone, computed from scratch.
double one_step_loss(const EnvState& s, Action a) {
  Grid g = s.grid;
  if (!a.is_move()) g.set(s.positions[0].row, s.positions[0].col, a.tile());
  return loss(compute_metrics(g), s.targets, s.weights);
}

}  // namespace

TEST_SUITE("agents") {
  TEST_CASE("policy tag names") {
    for (auto t : {PolicyTag::Random, PolicyTag::Greedy, PolicyTag::Noop}) CHECK(parse_policy_tag(to_string(t)) == t);
    CHECK_THROWS_AS(parse_policy_tag("smart"), std::invalid_argument);
  }

  TEST_CASE("random policy covers the action space") {
    RngStream rng(1);
    std::set<int> seen;
    for (int i = 0; i < 500; ++i) {
      const int a = random_policy(Domain::Dungeon, rng).index();
      REQUIRE(a >= 0);
      REQUIRE(a < 10);
      seen.insert(a);
    }
    CHECK(seen.size() == 10);
  }

  TEST_CASE("greedy merges two regions") {
    const auto g = Grid::from_ascii({"..#..", "..#..", "..#..", "..#..", "..#.."}, Domain::Binary);
    const auto s = fixture(g, {2, 2});
    const Action best = greedy_policy(s, 0);
    CHECK(best == Action::place(Tile::Air));
    const double chosen = one_step_loss(s, best);
    for (int i = 0; i < action_count(Domain::Binary); ++i) {
      if (Action(i) != best) CHECK(one_step_loss(s, Action(i)) > chosen);
    }
  }

  TEST_CASE("greedy never disconnects") {
    const auto h = Grid::from_ascii({"#####", "#####", ".....", "#####", "#####"}, Domain::Binary);
    const auto s = fixture(h, {2, 2});
    CHECK(greedy_policy(s, 0) != Action::place(Tile::Wall));
  }

  TEST_CASE("greedy falls back to move north on ties") {
    // Every edit of an all-air 3x3 map from its centre is neutral or worse.
    const auto g = Grid::from_ascii({"...", "...", "..."}, Domain::Binary);
    const auto s = fixture(g, {1, 1});
    const double base = one_step_loss(s, Action::move(Move::North));
    bool improving = false;
    for (int i = 4; i < 6; ++i) improving |= one_step_loss(s, Action(i)) < base;
    REQUIRE_FALSE(improving);
    CHECK(greedy_policy(s, 0) == Action::move(Move::North));
  }

  TEST_CASE("greedy is never worse than idling") {
    RngStream rng(44);
    for (int trial = 0; trial < 100; ++trial) {
      const auto g = oracle::random_grid(6, 6, rng);
      const Cell pos{static_cast<int>(rng.uniform_below(6)), static_cast<int>(rng.uniform_below(6))};
      const auto s = fixture(g, pos);
      const Action a = greedy_policy(s, 0);
      double best = one_step_loss(s, Action(0));
      for (int i = 1; i < 6; ++i) best = std::min(best, one_step_loss(s, Action(i)));
      REQUIRE(one_step_loss(s, a) == best);
    }
  }

  TEST_CASE("scripted joint actions") {
    EnvConfig c;
    c.max_width = 6;
    c.n_agents = 3;
    const auto s = reset_state(c, 5);
    RngStream a(9), b(9);
    CHECK(scripted_joint_action(PolicyTag::Random, s, a) == scripted_joint_action(PolicyTag::Random, s, b));
    const auto noop = scripted_joint_action(PolicyTag::Noop, s, a);
    CHECK(noop == std::vector<Action>(3, Action::move(Move::North)));
    CHECK(scripted_joint_action(PolicyTag::Greedy, s, a).size() == 3);
  }
}
