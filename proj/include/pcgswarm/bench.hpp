#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcgswarm/env.hpp"

namespace pcgswarm {

struct BenchResult {
  int reward_freq = 1;
  std::int64_t steps = 0;
  std::int64_t reward_computations = 0;
  std::int64_t episodes = 0;
  double seconds = 0.0;
  [[nodiscard]] double steps_per_second() const { return seconds > 0 ? steps / seconds : 0.0; }
  [[nodiscard]] double reward_computations_per_second() const {
    return seconds > 0 ? reward_computations / seconds : 0.0;
  }
};

struct BenchReport {
  EnvConfig config;
  std::vector<BenchResult> results;
  [[nodiscard]] std::string to_json() const;
};

/// Times exactly `steps` joint steps (random actions, observations built
/// every step, auto-reset at episode end) for each reward frequency.
BenchReport run_bench(const EnvConfig& config, std::int64_t steps, const std::vector<int>& reward_freqs = {1, 10},
                      std::uint64_t seed = 0);

}  // namespace pcgswarm
