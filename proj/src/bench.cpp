#include "pcgswarm/bench.hpp"

#include <chrono>
#include <stdexcept>

#include "pcgswarm/agents.hpp"
#include "pcgswarm/serialize.hpp"

namespace pcgswarm {

std::string BenchReport::to_json() const {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : results) {
    runs.push_back({{"reward_freq", r.reward_freq},
                    {"steps", r.steps},
                    {"reward_computations", r.reward_computations},
                    {"episodes", r.episodes},
                    {"seconds", r.seconds},
                    {"joint_steps_per_sec", r.steps_per_second()},
                    {"reward_computations_per_sec", r.reward_computations_per_second()}});
  }
  return nlohmann::json{{"config", config}, {"runs", std::move(runs)}}.dump(2);
}

BenchReport run_bench(const EnvConfig& config, std::int64_t steps, const std::vector<int>& reward_freqs,
                      std::uint64_t seed) {
  if (steps < 1) throw std::invalid_argument("bench steps must be >= 1");
  BenchReport report;
  report.config = config;
  for (int freq : reward_freqs) {
    EnvConfig cfg = config;
    cfg.reward_freq = freq;
    cfg.validate();

    const RngStream root(seed);
    RngStream act_rng = root.split("bench-actions");
    std::int64_t episode = 0;
    EnvState state = reset_state(cfg, root.split("episode", 0).next_u64());
    std::vector<Action> actions(static_cast<std::size_t>(cfg.n_agents));

    BenchResult r;
    r.reward_freq = freq;
    const auto start = std::chrono::steady_clock::now();
    for (std::int64_t i = 0; i < steps; ++i) {
      for (auto& a : actions) a = random_policy(cfg.domain, act_rng);
      const StepOutcome o = advance(state, actions, cfg);
      [[maybe_unused]] const auto obs = observe_all(state, cfg);
      r.reward_computations += o.computed_reward ? 1 : 0;
      if (o.done) {
        ++episode;
        ++r.episodes;
        state = reset_state(cfg, root.split("episode", static_cast<std::uint64_t>(episode)).next_u64());
      }
      ++r.steps;
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.results.push_back(r);
  }
  return report;
}

}  // namespace pcgswarm
