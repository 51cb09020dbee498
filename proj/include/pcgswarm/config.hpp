#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcgswarm/env.hpp"
#include "pcgswarm/eval.hpp"
#include "pcgswarm/mappo.hpp"

namespace pcgswarm {

/// Raised for unparseable or invalid run configuration. `field` is the
/// dotted TOML key when known; `line` is the 1-based source line when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message, std::optional<int> line = std::nullopt);
  [[nodiscard]] const std::string& field() const { return field_; }
  [[nodiscard]] std::optional<int> line() const { return line_; }

 private:
  std::string field_;
  std::optional<int> line_;
};

struct EvalSettings {
  int n_seeds = 50;
  std::vector<int> widths{8, 16, 24, 32};
  std::vector<ShapeMode> modes{ShapeMode::Fixed, ShapeMode::Random};
  std::string policy = "greedy";  // random | greedy | noop
  std::string checkpoint;         // takes precedence over `policy` when set
};

struct IoPaths {
  std::string checkpoint_dir = "runs/checkpoints";
  std::string trace_dir = "runs/traces";
  std::string results_dir = "runs/results";
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::int64_t log_interval = 10'000;
  int threads = 1;
  EnvConfig env;
  PPOConfig ppo;
  EvalSettings eval;
  IoPaths io;

  /// Validates every nested section; throws ConfigError.
  void validate() const;
  [[nodiscard]] EvalSpec eval_spec() const;
};

/// Required keys: env.domain, env.n_agents, env.max_width. Unknown keys are
/// rejected. Throws ConfigError.
RunConfig parse_run_config(const std::string& toml_text, const std::string& source = "<string>");
RunConfig load_run_config(const std::string& path);

}  // namespace pcgswarm
