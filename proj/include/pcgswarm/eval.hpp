#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pcgswarm/env.hpp"
#include "pcgswarm/policy.hpp"

namespace pcgswarm {

enum class ShapeMode : std::uint8_t { Fixed, Random };

std::string_view to_string(ShapeMode m);
ShapeMode parse_shape_mode(std::string_view name);

struct EvalSpec {
  EnvConfig base;  // max_width and randomize_shape are overridden per cell
  int n_seeds = 50;
  std::vector<int> widths{8, 16, 24, 32};
  std::vector<ShapeMode> modes{ShapeMode::Fixed, ShapeMode::Random};
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

struct EvalCell {
  int width = 0;
  ShapeMode mode = ShapeMode::Fixed;
  double mean = 0.0;
  double std = 0.0;  // population std across seeds
  int n_episodes = 0;
  std::vector<double> returns;      // per seed, in seed order
  std::vector<double> final_losses;  // per seed, loss of the final grid
  std::vector<MapShape> shapes;
};

struct EvalTable {
  int n_agents = 0;
  double scans = 0.0;
  int reward_freq = 0;
  std::vector<EvalCell> cells;  // widths-major, then modes

  [[nodiscard]] const EvalCell& at(int width, ShapeMode mode) const;
};

/// Environment seed for (width, mode, seed index); independent of the policy
/// and agent count so every arm sees the same initial maps.
std::uint64_t eval_episode_seed(std::uint64_t spec_seed, int width, ShapeMode mode, int index);

/// Runs n_seeds full episodes per (width, mode) cell. Results are reduced
/// in seed order regardless of thread scheduling.
EvalTable evaluate(const EvalSpec& spec, const JointPolicy& policy);

enum class BudgetRegime : std::uint8_t {
  FixedEnvSteps,           // (a) same scans for every arm
  FixedTotalActions,       // (b) scans = base / n
  FixedActionsAndRewards,  // (c) scans and reward_freq = base * max_n / n
};

std::string_view to_string(BudgetRegime r);
BudgetRegime parse_regime(std::string_view name);  // "a", "b" or "c"

struct TrendArm {
  int n_agents = 0;
  double scans = 0.0;
  int reward_freq = 1;
  friend bool operator==(const TrendArm&, const TrendArm&) = default;
};

/// Per-arm budget settings. Throws std::invalid_argument for an empty list
/// or, in regime (c), agent counts that do not divide the largest one.
std::vector<TrendArm> trend_arms(BudgetRegime regime, const std::vector<int>& agents, double base_scans,
                                 int base_reward_freq);

struct TrendReport {
  BudgetRegime regime = BudgetRegime::FixedEnvSteps;
  std::vector<EvalTable> tables;  // one per arm
};

TrendReport trend_experiment(const std::vector<int>& agents, BudgetRegime regime, const EvalSpec& base,
                             const JointPolicy& policy, double base_scans, int base_reward_freq);

/// Columns: n_agents,scans,reward_freq,width,shape_mode,mean,std,n_episodes
std::string to_csv(const std::vector<EvalTable>& tables);
/// One row per arm, one column per (shape mode, width).
std::string to_markdown(const std::vector<EvalTable>& tables);

}  // namespace pcgswarm
