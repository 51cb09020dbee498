#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pcgswarm/config.hpp"

using namespace pcgswarm;

namespace {

const std::string kMinimal = R"(
[env]
domain = "binary"
n_agents = 2
max_width = 8
)";

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("minimal config gets defaults") {
    const auto c = parse_run_config(kMinimal);
    CHECK(c.env.n_agents == 2);
    CHECK(c.env.obs_window == 3);
    CHECK(c.ppo.gamma == 0.99);
    CHECK(c.eval.n_seeds == 50);
  }

  TEST_CASE("shipped config parses") {
    const auto c = load_run_config(std::string(PCG_SWARM_SOURCE_DIR) + "/configs/binary_8x8.toml");
    CHECK(c.seed == 1);
    CHECK(c.env.seed == 1);
    CHECK(c.ppo.total_steps == 2000000);
  }

  TEST_CASE("missing required field names it") {
    try {
      parse_run_config("[env]\ndomain = \"binary\"\nmax_width = 8\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.field() == "env.n_agents");
      CHECK(std::string(e.what()).find("env.n_agents") != std::string::npos);
    }
  }

  TEST_CASE("type errors carry a line") {
    try {
      parse_run_config(kMinimal + "reward_freq = \"often\"\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.field() == "env.reward_freq");
      REQUIRE(e.line().has_value());
      CHECK(*e.line() == 6);
    }
  }

  TEST_CASE("syntax errors carry a line") {
    try {
      parse_run_config("[env\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.line().has_value());
    }
  }

  TEST_CASE("unknown keys and bad values are rejected") {
    CHECK_THROWS_AS(parse_run_config(kMinimal + "colour = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(kMinimal + "n_agents_typo = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(kMinimal + "reward_freq = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(kMinimal + "obs_window = \"wide\"\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("seed = -1\n" + kMinimal), ConfigError);
    CHECK_THROWS_AS(parse_run_config(kMinimal + "[ppo]\ntotal_steps = 1001\n"), ConfigError);
  }

  TEST_CASE("full window, targets and weights") {
    const auto c = parse_run_config(kMinimal +
                                    "obs_window = \"full\"\n"
                                    "[env.targets]\nn_regions = [1, 2]\ndiameter = [30, inf]\n"
                                    "[env.weights]\nn_regions = 3.0\n");
    CHECK(c.env.obs_window == kFullWindow);
    REQUIRE(c.env.targets.has_value());
    CHECK((*c.env.targets)[Metric::Regions] == Interval{1, 2});
    CHECK((*c.env.targets)[Metric::Diameter].lo == 30);
    REQUIRE(c.env.weights.has_value());
    CHECK((*c.env.weights)[Metric::Regions] == 3.0);
    CHECK((*c.env.weights)[Metric::Diameter] == 1.0);
  }

  TEST_CASE("eval settings") {
    const auto c = parse_run_config(kMinimal + "[eval]\nwidths = [8, 16]\nmodes = [\"random\"]\nn_seeds = 4\n");
    const auto spec = c.eval_spec();
    CHECK(spec.widths == std::vector<int>{8, 16});
    CHECK(spec.modes == std::vector<ShapeMode>{ShapeMode::Random});
    CHECK(spec.n_seeds == 4);
    CHECK_THROWS_AS(parse_run_config(kMinimal + "[eval]\nwidths = [2]\n"), ConfigError);
  }

  TEST_CASE("missing file") {
    CHECK_THROWS_AS(load_run_config("/nonexistent/run.toml"), ConfigError);
  }
}
