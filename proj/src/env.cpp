#include "pcgswarm/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pcgswarm {

int action_count(Domain d) { return kNumMoves + TileSet::for_domain(d).size(); }

void EnvConfig::validate() const {
  if (n_agents < 1 || n_agents > kMaxAgents) {
    throw std::invalid_argument("env.n_agents must be in [1, " + std::to_string(kMaxAgents) +
                                "], got " + std::to_string(n_agents));
  }
  if (obs_window != kFullWindow && obs_window < 3) {
    throw std::invalid_argument("env.obs_window must be >= 3 or full, got " +
                                std::to_string(obs_window));
  }
  if (!(max_board_scans > 0.0) || !std::isfinite(max_board_scans)) {
    throw std::invalid_argument("env.max_board_scans must be positive");
  }
  if (reward_freq < 1) throw std::invalid_argument("env.reward_freq must be >= 1");
  if (max_width < kMinMapDim) {
    throw std::invalid_argument("env.max_width must be >= " + std::to_string(kMinMapDim));
  }
  if (!(wall_fraction >= 0.0 && wall_fraction <= 1.0)) {
    throw std::invalid_argument("env.wall_fraction must lie in [0, 1]");
  }
  if (targets) {
    if (targets->domain != domain) throw std::invalid_argument("env.targets domain mismatch");
    targets->validate();
  }
  if (weights) {
    if (weights->domain != domain) throw std::invalid_argument("env.weights domain mismatch");
    weights->validate();
  }
}

int Observation::mask_sum(int k) const {
  int total = 0;
  for (int r = 0; r < window; ++r) {
    for (int c = 0; c < window; ++c) total += mask(r, c, k);
  }
  return total;
}

int episode_budget(const EnvConfig& config, const MapShape& shape) {
  const double steps = std::floor(config.max_board_scans * 2.0 * static_cast<double>(shape.height) *
                                  static_cast<double>(shape.width));
  if (steps < 1.0) {
    throw std::invalid_argument("episode budget is zero for " + std::to_string(shape.height) +
                                "x" + std::to_string(shape.width) + " at " +
                                std::to_string(config.max_board_scans) + " board scans");
  }
  return static_cast<int>(steps);
}

EnvState reset_state(const EnvConfig& config, std::uint64_t seed) {
  config.validate();
  const RngStream root(seed);
  auto shape_rng = root.split("shape");
  auto grid_rng = root.split("grid");
  auto pos_rng = root.split("positions");

  EnvState s;
  s.shape = sample_map_shape(config.max_width, config.randomize_shape, shape_rng);
  s.grid = init_random_grid(s.shape, TileSet::for_domain(config.domain), grid_rng,
                            {.wall_fraction = config.wall_fraction});
  s.positions.reserve(static_cast<std::size_t>(config.n_agents));
  for (int i = 0; i < config.n_agents; ++i) {
    const auto r = static_cast<int>(pos_rng.uniform_below(static_cast<std::uint64_t>(s.shape.height)));
    const auto c = static_cast<int>(pos_rng.uniform_below(static_cast<std::uint64_t>(s.shape.width)));
    s.positions.push_back({r, c});
  }
  s.step_count = 0;
  s.budget = episode_budget(config, s.shape);
  s.targets = config.targets ? *config.targets : default_targets(config.domain, s.shape);
  s.weights = config.reward_weights();
  s.last_metrics = compute_metrics(s.grid);
  s.rng = root.split("episode");
  return s;
}

ResetResult reset(const EnvConfig& config, std::uint64_t seed) {
  ResetResult out{reset_state(config, seed), {}};
  out.observations = observe_all(out.state, config);
  return out;
}

ResetResult reset(const EnvConfig& config) { return reset(config, config.seed); }

StepOutcome advance(EnvState& state, std::span<const Action> actions, const EnvConfig& config) {
  if (state.done()) throw std::logic_error("step called on a finished episode");
  if (static_cast<int>(actions.size()) != state.n_agents()) {
    throw std::invalid_argument("expected " + std::to_string(state.n_agents()) +
                                " actions, got " + std::to_string(actions.size()));
  }
  const int n_actions = action_count(state.grid.domain());
  for (const Action a : actions) {
    if (a.index() < 0 || a.index() >= n_actions) {
      throw std::invalid_argument("action index " + std::to_string(a.index()) +
                                  " outside [0, " + std::to_string(n_actions) + ")");
    }
  }

  // Sequential application in agent order: the last write to a cell wins.
  for (std::size_t i = 0; i < actions.size(); ++i) {
    auto& pos = state.positions[i];
    const Action a = actions[i];
    if (!a.is_move()) {
      state.grid.put(state.grid.index(pos.row, pos.col), a.tile());
      continue;
    }
    switch (a.direction()) {
      case Move::North: pos.row = std::max(pos.row - 1, 0); break;
      case Move::South: pos.row = std::min(pos.row + 1, state.grid.height() - 1); break;
      case Move::East: pos.col = std::min(pos.col + 1, state.grid.width() - 1); break;
      case Move::West: pos.col = std::max(pos.col - 1, 0); break;
    }
  }

  ++state.step_count;
  StepOutcome out;
  out.done = state.done();
  if (state.step_count % config.reward_freq == 0 || out.done) {
    const MetricsVector now = compute_metrics(state.grid);
    out.reward = reward(state.last_metrics, now, state.targets, state.weights);
    out.computed_reward = true;
    state.last_metrics = now;
    ++state.reward_computations;
  }
  return out;
}

StepResult step(EnvState& state, std::span<const Action> actions, const EnvConfig& config) {
  const StepOutcome o = advance(state, actions, config);
  return {observe_all(state, config), o.reward, o.done};
}

Observation observe(const EnvState& state, int agent_id, const EnvConfig& config) {
  const int n = state.n_agents();
  if (agent_id < 0 || agent_id >= n) {
    throw std::out_of_range("agent_id " + std::to_string(agent_id) + " outside [0, " +
                            std::to_string(n) + ")");
  }
  Observation obs;
  obs.window = config.window();
  obs.n_agents = n;
  const int w = obs.window;
  const int ch = obs.channels();
  obs.data.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(w) * static_cast<std::size_t>(ch), 0);

  // Even windows put the agent at offset w/2, one cell past the true middle.
  const Cell me = state.positions[static_cast<std::size_t>(agent_id)];
  const int top = me.row - w / 2;
  const int left = me.col - w / 2;
  const auto& g = state.grid;
  for (int r = 0; r < w; ++r) {
    for (int c = 0; c < w; ++c) {
      const int gr = top + r;
      const int gc = left + c;
      const auto off = (static_cast<std::size_t>(r) * static_cast<std::size_t>(w) + static_cast<std::size_t>(c)) *
                       static_cast<std::size_t>(ch);
      obs.data[off] = static_cast<std::uint8_t>(g.in_bounds(gr, gc) ? g[g.index(gr, gc)] : Tile::Border);
    }
  }
  for (int k = 0; k < n; ++k) {
    const Cell p = state.positions[static_cast<std::size_t>((agent_id + k) % n)];
    const int r = p.row - top;
    const int c = p.col - left;
    if (r < 0 || r >= w || c < 0 || c >= w) continue;
    const auto off = (static_cast<std::size_t>(r) * static_cast<std::size_t>(w) + static_cast<std::size_t>(c)) *
                     static_cast<std::size_t>(ch);
    obs.data[off + 1 + static_cast<std::size_t>(k)] = 1;
  }
  return obs;
}

std::vector<Observation> observe_all(const EnvState& state, const EnvConfig& config) {
  std::vector<Observation> out;
  out.reserve(static_cast<std::size_t>(state.n_agents()));
  for (int i = 0; i < state.n_agents(); ++i) out.push_back(observe(state, i, config));
  return out;
}

double current_loss(const EnvState& state) {
  return loss(compute_metrics(state.grid), state.targets, state.weights);
}

}  // namespace pcgswarm
