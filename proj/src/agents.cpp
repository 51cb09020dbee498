#include "pcgswarm/agents.hpp"

#include <stdexcept>
#include <string>

namespace pcgswarm {

std::string_view to_string(PolicyTag tag) {
  switch (tag) {
    case PolicyTag::Random: return "random";
    case PolicyTag::Greedy: return "greedy";
    case PolicyTag::Noop: return "noop";
  }
  return "unknown";
}

PolicyTag parse_policy_tag(std::string_view name) {
  if (name == "random") return PolicyTag::Random;
  if (name == "greedy") return PolicyTag::Greedy;
  if (name == "noop") return PolicyTag::Noop;
  throw std::invalid_argument("unknown policy '" + std::string(name) +
                              "' (expected random, greedy or noop)");
}

Action random_policy(Domain domain, RngStream& rng) {
  return Action(static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(action_count(domain)))));
}

Action greedy_policy(const EnvState& state, int agent_id) {
  if (agent_id < 0 || agent_id >= state.n_agents()) {
    throw std::out_of_range("greedy_policy: bad agent id " + std::to_string(agent_id));
  }
  const Cell pos = state.positions[static_cast<std::size_t>(agent_id)];
  const double base = current_loss(state);

  Grid scratch = state.grid;
  const int idx = scratch.index(pos.row, pos.col);
  const Tile original = scratch[idx];

  Action best = Action::move(Move::North);
  double best_loss = base;  // every move leaves the loss at `base`
  const int n = action_count(state.grid.domain());
  for (int a = kNumMoves; a < n; ++a) {
    const Action place(a);
    if (place.tile() == original) continue;
    scratch.put(idx, place.tile());
    const double l = loss(compute_metrics(scratch), state.targets, state.weights);
    scratch.put(idx, original);
    if (l < best_loss) {
      best_loss = l;
      best = place;
    }
  }
  return best;
}

std::vector<Action> scripted_joint_action(PolicyTag tag, const EnvState& state, RngStream& rng) {
  std::vector<Action> actions;
  actions.reserve(static_cast<std::size_t>(state.n_agents()));
  for (int i = 0; i < state.n_agents(); ++i) {
    switch (tag) {
      case PolicyTag::Random: actions.push_back(random_policy(state.grid.domain(), rng)); break;
      case PolicyTag::Greedy: actions.push_back(greedy_policy(state, i)); break;
      case PolicyTag::Noop: actions.push_back(noop_policy()); break;
    }
  }
  return actions;
}

}  // namespace pcgswarm
