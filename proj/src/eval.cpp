#include "pcgswarm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "pcgswarm/parallel.hpp"
#include "pcgswarm/trace.hpp"

namespace pcgswarm {

std::string_view to_string(ShapeMode m) { return m == ShapeMode::Fixed ? "fixed" : "random"; }

ShapeMode parse_shape_mode(std::string_view name) {
  if (name == "fixed") return ShapeMode::Fixed;
  if (name == "random") return ShapeMode::Random;
  throw std::invalid_argument("unknown shape mode '" + std::string(name) + "'");
}

void EvalSpec::validate() const {
  if (n_seeds < 1) throw std::invalid_argument("eval.n_seeds must be >= 1");
  if (widths.empty()) throw std::invalid_argument("eval.widths must not be empty");
  for (int w : widths) {
    if (w < kMinMapDim) throw std::invalid_argument("eval.widths entries must be >= 3");
  }
  if (modes.empty()) throw std::invalid_argument("eval.modes must not be empty");
  base.validate();
}

const EvalCell& EvalTable::at(int width, ShapeMode mode) const {
  for (const auto& c : cells) {
    if (c.width == width && c.mode == mode) return c;
  }
  throw std::out_of_range("no eval cell for width " + std::to_string(width));
}

std::uint64_t eval_episode_seed(std::uint64_t spec_seed, int width, ShapeMode mode, int index) {
  return RngStream(spec_seed)
      .split("eval")
      .split(static_cast<std::uint64_t>(width))
      .split(static_cast<std::uint64_t>(mode))
      .split(static_cast<std::uint64_t>(index))
      .next_u64();
}

EvalTable evaluate(const EvalSpec& spec, const JointPolicy& policy) {
  spec.validate();
  EvalTable table;
  table.n_agents = spec.base.n_agents;
  table.scans = spec.base.max_board_scans;
  table.reward_freq = spec.base.reward_freq;

  for (int width : spec.widths) {
    for (ShapeMode mode : spec.modes) {
      EnvConfig cfg = spec.base;
      cfg.max_width = width;
      cfg.randomize_shape = mode == ShapeMode::Random;
      policy.check_compatible(cfg);

      EvalCell cell;
      cell.width = width;
      cell.mode = mode;
      cell.n_episodes = spec.n_seeds;
      cell.returns.resize(static_cast<std::size_t>(spec.n_seeds));
      cell.final_losses.resize(static_cast<std::size_t>(spec.n_seeds));
      cell.shapes.resize(static_cast<std::size_t>(spec.n_seeds));
      parallel_for(spec.n_seeds, spec.threads, [&](int i) {
        const std::uint64_t seed = eval_episode_seed(spec.seed, width, mode, i);
        const RngStream policy_rng = RngStream(seed).split("policy");
        const EpisodeResult ep = run_episode(cfg, seed, policy, policy_rng);
        const auto ui = static_cast<std::size_t>(i);
        cell.returns[ui] = ep.total_reward;
        cell.final_losses[ui] = current_loss(ep.final_state);
        cell.shapes[ui] = ep.final_state.shape;
      });

      double sum = 0.0;
      for (double r : cell.returns) sum += r;
      cell.mean = sum / spec.n_seeds;
      double var = 0.0;
      for (double r : cell.returns) var += (r - cell.mean) * (r - cell.mean);
      cell.std = std::sqrt(var / spec.n_seeds);
      table.cells.push_back(std::move(cell));
    }
  }
  return table;
}

std::string_view to_string(BudgetRegime r) {
  switch (r) {
    case BudgetRegime::FixedEnvSteps: return "a";
    case BudgetRegime::FixedTotalActions: return "b";
    case BudgetRegime::FixedActionsAndRewards: return "c";
  }
  return "?";
}

BudgetRegime parse_regime(std::string_view name) {
  if (name == "a" || name == "fixed_env_steps") return BudgetRegime::FixedEnvSteps;
  if (name == "b" || name == "fixed_total_actions") return BudgetRegime::FixedTotalActions;
  if (name == "c" || name == "fixed_actions_and_rewards") return BudgetRegime::FixedActionsAndRewards;
  throw std::invalid_argument("unknown regime '" + std::string(name) + "' (expected a, b or c)");
}

std::vector<TrendArm> trend_arms(BudgetRegime regime, const std::vector<int>& agents, double base_scans,
                                 int base_reward_freq) {
  if (agents.empty()) throw std::invalid_argument("trend experiment needs at least one agent count");
  for (int n : agents) {
    if (n < 1 || n > kMaxAgents) throw std::invalid_argument("agent count out of range: " + std::to_string(n));
  }
  if (!(base_scans > 0.0)) throw std::invalid_argument("base scans must be positive");
  if (base_reward_freq < 1) throw std::invalid_argument("base reward frequency must be >= 1");

  const int max_n = *std::max_element(agents.begin(), agents.end());
  std::vector<TrendArm> arms;
  for (int n : agents) {
    TrendArm arm{n, base_scans, base_reward_freq};
    switch (regime) {
      case BudgetRegime::FixedEnvSteps: break;
      case BudgetRegime::FixedTotalActions: arm.scans = base_scans / n; break;
      case BudgetRegime::FixedActionsAndRewards:
        if (max_n % n != 0) {
          throw std::invalid_argument("regime c needs every agent count to divide " + std::to_string(max_n) +
                                      "; got " + std::to_string(n));
        }
        arm.scans = base_scans * max_n / n;
        arm.reward_freq = base_reward_freq * (max_n / n);
        break;
    }
    arms.push_back(arm);
  }
  return arms;
}

TrendReport trend_experiment(const std::vector<int>& agents, BudgetRegime regime, const EvalSpec& base,
                             const JointPolicy& policy, double base_scans, int base_reward_freq) {
  TrendReport report;
  report.regime = regime;
  for (const TrendArm& arm : trend_arms(regime, agents, base_scans, base_reward_freq)) {
    EvalSpec spec = base;
    spec.base.n_agents = arm.n_agents;
    spec.base.max_board_scans = arm.scans;
    spec.base.reward_freq = arm.reward_freq;
    report.tables.push_back(evaluate(spec, policy));
  }
  return report;
}

namespace {

std::string fmt_double(double x, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, x);
  return buf;
}

}  // namespace

std::string to_csv(const std::vector<EvalTable>& tables) {
  std::ostringstream os;
  os << "n_agents,scans,reward_freq,width,shape_mode,mean,std,n_episodes\n";
  for (const auto& t : tables) {
    for (const auto& c : t.cells) {
      os << t.n_agents << ',' << fmt_double(t.scans, 4) << ',' << t.reward_freq << ',' << c.width << ','
         << to_string(c.mode) << ',' << fmt_double(c.mean, 6) << ',' << fmt_double(c.std, 6) << ','
         << c.n_episodes << '\n';
    }
  }
  return os.str();
}

std::string to_markdown(const std::vector<EvalTable>& tables) {
  if (tables.empty()) return {};
  std::vector<ShapeMode> modes;
  std::vector<int> widths;
  for (const auto& c : tables.front().cells) {
    if (std::find(modes.begin(), modes.end(), c.mode) == modes.end()) modes.push_back(c.mode);
    if (std::find(widths.begin(), widths.end(), c.width) == widths.end()) widths.push_back(c.width);
  }
  std::ostringstream os;
  os << "| n. agents | max. board scans | reward freq. |";
  for (ShapeMode m : modes) {
    for (int w : widths) os << ' ' << to_string(m) << ' ' << w << " |";
  }
  os << "\n|---|---|---|";
  for (std::size_t i = 0; i < modes.size() * widths.size(); ++i) os << "---|";
  os << '\n';
  for (const auto& t : tables) {
    os << "| " << t.n_agents << " | " << fmt_double(t.scans, 2) << " | " << t.reward_freq << " |";
    for (ShapeMode m : modes) {
      for (int w : widths) {
        const auto& c = t.at(w, m);
        os << ' ' << fmt_double(c.mean, 2) << " ± " << fmt_double(c.std, 2) << " |";
      }
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace pcgswarm
