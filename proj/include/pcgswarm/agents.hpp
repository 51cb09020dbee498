#pragma once

#include <string_view>

#include "pcgswarm/env.hpp"

namespace pcgswarm {

enum class PolicyTag : std::uint8_t { Random, Greedy, Noop };

std::string_view to_string(PolicyTag tag);
PolicyTag parse_policy_tag(std::string_view name);

/// Uniform over the domain's action indices.
Action random_policy(Domain domain, RngStream& rng);

/// Leaves the grid untouched: always Move North.
inline Action noop_policy() { return Action::move(Move::North); }

/// One-step lookahead with full state access. Tries every action for
/// `agent_id` (others idle), scores the resulting grid with the episode
/// loss and returns the minimizer, lowest action index on ties. Moves never
/// change the grid, so with no improving edit this is Move North.
Action greedy_policy(const EnvState& state, int agent_id);

/// Joint action for all agents from one scripted policy. Every agent decides
/// against the same pre-step state.
std::vector<Action> scripted_joint_action(PolicyTag tag, const EnvState& state, RngStream& rng);

}  // namespace pcgswarm
