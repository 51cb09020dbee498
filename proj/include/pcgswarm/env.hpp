#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pcgswarm/grid.hpp"
#include "pcgswarm/reward.hpp"
#include "pcgswarm/rng.hpp"

namespace pcgswarm {

inline constexpr int kMaxAgents = 8;
inline constexpr int kNumMoves = 4;
/// obs_window value meaning "see the whole map from anywhere": 2*max_width-1.
inline constexpr int kFullWindow = 0;

enum class Move : std::uint8_t { North = 0, South = 1, East = 2, West = 3 };

/// Turtle action. Index encoding is frozen: 0-3 move N,S,E,W, then one
/// Place per editable tile in tile-code order.
class Action {
 public:
  constexpr Action() = default;
  constexpr explicit Action(int index) : index_(index) {}

  static constexpr Action move(Move m) { return Action(static_cast<int>(m)); }
  static constexpr Action place(Tile t) { return Action(kNumMoves + static_cast<int>(t)); }

  [[nodiscard]] constexpr int index() const { return index_; }
  [[nodiscard]] constexpr bool is_move() const { return index_ < kNumMoves; }
  [[nodiscard]] constexpr Move direction() const { return static_cast<Move>(index_); }
  [[nodiscard]] constexpr Tile tile() const { return static_cast<Tile>(index_ - kNumMoves); }

  friend constexpr bool operator==(Action, Action) = default;

 private:
  int index_ = 0;
};

/// 6 for binary, 10 for dungeon.
int action_count(Domain d);

struct EnvConfig {
  Domain domain = Domain::Binary;
  int n_agents = 1;
  int obs_window = 3;  // >= 3, or kFullWindow
  double max_board_scans = 1.0;
  int reward_freq = 1;
  int max_width = 16;
  bool randomize_shape = false;
  double wall_fraction = 0.5;
  std::optional<TargetSpec> targets;   // default_targets() per episode when unset
  std::optional<RewardWeights> weights;  // 1.0 everywhere when unset
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  [[nodiscard]] int window() const {
    return obs_window == kFullWindow ? 2 * max_width - 1 : obs_window;
  }
  [[nodiscard]] RewardWeights reward_weights() const {
    return weights ? *weights : RewardWeights::uniform(domain);
  }

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

/// Egocentric patch, laid out [row][col][channel]. Channel 0 holds tile
/// codes (Border outside the map); channel 1+k is the position mask of agent
/// (observer + k) mod n_agents, so channel 1 is always the observer.
struct Observation {
  int window = 0;
  int n_agents = 0;
  std::vector<std::uint8_t> data;

  [[nodiscard]] int channels() const { return 1 + n_agents; }
  [[nodiscard]] Tile tile(int row, int col) const {
    return static_cast<Tile>(data[offset(row, col)]);
  }
  /// Mask channel k (0 = observing agent).
  [[nodiscard]] std::uint8_t mask(int row, int col, int k) const {
    return data[offset(row, col) + 1 + static_cast<std::size_t>(k)];
  }
  [[nodiscard]] int mask_sum(int k) const;

 private:
  [[nodiscard]] std::size_t offset(int row, int col) const {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(window) +
            static_cast<std::size_t>(col)) *
           static_cast<std::size_t>(channels());
  }
};

struct EnvState {
  Grid grid;
  MapShape shape;
  std::vector<Cell> positions;
  int step_count = 0;
  int budget = 0;
  TargetSpec targets;
  RewardWeights weights;
  MetricsVector last_metrics;
  int reward_computations = 0;
  RngStream rng;

  [[nodiscard]] bool done() const { return step_count >= budget; }
  [[nodiscard]] int n_agents() const { return static_cast<int>(positions.size()); }

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

/// floor(max_board_scans * 2 * H * W). Throws if that is 0.
int episode_budget(const EnvConfig& config, const MapShape& shape);

struct ResetResult {
  EnvState state;
  std::vector<Observation> observations;
};

struct StepOutcome {
  double reward = 0.0;
  bool done = false;
  bool computed_reward = false;
};

struct StepResult {
  std::vector<Observation> observations;
  double reward = 0.0;
  bool done = false;
};

/// Starts an episode from config.seed.
ResetResult reset(const EnvConfig& config);
/// Same, with an explicit seed in place of config.seed.
ResetResult reset(const EnvConfig& config, std::uint64_t seed);
/// Reset without building observations.
EnvState reset_state(const EnvConfig& config, std::uint64_t seed);

/// Applies one joint action (one per agent, in agent order) in place.
/// Rewards are emitted every reward_freq steps and on the final step.
/// Throws std::logic_error on a finished episode, std::invalid_argument on a
/// wrong action count or an action outside the domain.
StepOutcome advance(EnvState& state, std::span<const Action> actions, const EnvConfig& config);

/// advance() plus fresh observations for every agent.
StepResult step(EnvState& state, std::span<const Action> actions, const EnvConfig& config);

Observation observe(const EnvState& state, int agent_id, const EnvConfig& config);
std::vector<Observation> observe_all(const EnvState& state, const EnvConfig& config);

/// Loss of the current grid under the episode's targets, computed fresh.
double current_loss(const EnvState& state);

}  // namespace pcgswarm
