#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "doctest.h"
#include "json.hpp"
#include "pcgswarm/mappo.hpp"

namespace fs = std::filesystem;
using pcgswarm::cli::run;

namespace {

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() / ("pcgswarm_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  }
  [[nodiscard]] std::string path(const std::string& name) const { return (dir / name).string(); }
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "pcg-swarm");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), {}};
}

const std::string kTiny = R"(seed = 4
log_interval = 1000
[env]
domain = "binary"
n_agents = 1
max_width = 8
[ppo]
total_steps = 10000
num_envs = 8
rollout_len = 32
hidden = 16
[eval]
n_seeds = 2
widths = [8]
)";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 2") {
    CHECK(call({}).code == 2);
    CHECK(call({"frobnicate"}).code == 2);
    CHECK(call({"eval", "--config", "/nonexistent.toml"}).code == 2);
  }

  TEST_CASE("missing env.n_agents exits 2 naming the field") {
    Sandbox sb;
    const auto cfg = sb.write("bad.toml", "[env]\ndomain = \"binary\"\nmax_width = 8\n");
    const auto r = call({"eval", "--config", cfg, "--policy", "noop"});
    CHECK(r.code == 2);
    CHECK(r.err.find("env.n_agents") != std::string::npos);
  }

  TEST_CASE("train writes a reloadable checkpoint and a reproducible curve") {
    Sandbox sb;
    const auto cfg = sb.write("run.toml", kTiny);
    REQUIRE(call({"train", "--config", cfg, "--out", sb.path("a")}).code == 0);
    REQUIRE(call({"train", "--config", cfg, "--out", sb.path("b"), "--threads", "2"}).code == 0);
    const auto ck = pcgswarm::load_checkpoint(sb.path("a/checkpoint.json"));
    CHECK(ck.env.max_width == 8);
    const auto curve = slurp(sb.path("a/train_curve.csv"));
    CHECK(std::count(curve.begin(), curve.end(), '\n') == 11);
    CHECK(curve == slurp(sb.path("b/train_curve.csv")));

    SUBCASE("checkpoint evaluates") {
      const auto r = call({"eval", "--config", cfg, "--checkpoint", sb.path("a/checkpoint.json"), "--out", sb.path("e")});
      CHECK(r.code == 0);
      CHECK(fs::exists(sb.path("e/eval.csv")));
    }
    SUBCASE("incompatible checkpoint exits 1 with a shape diagnostic") {
      std::string text = kTiny;
      text.replace(text.find("max_width = 8"), 13, "max_width = 8\nobs_window = 5");
      const auto cfg5 = sb.write("w5.toml", text);
      const auto r = call({"eval", "--config", cfg5, "--checkpoint", sb.path("a/checkpoint.json"), "--out", sb.path("e")});
      CHECK(r.code == 1);
      CHECK(r.err.find("observation") != std::string::npos);
    }
  }

  TEST_CASE("eval layouts") {
    Sandbox sb;
    std::string text = kTiny;
    text.replace(text.find("widths = [8]"), 12, "widths = [8, 16, 24, 32]");
    const auto cfg = sb.write("run.toml", text);
    SUBCASE("noop gives an all-zero table with 8 columns") {
      REQUIRE(call({"eval", "--config", cfg, "--policy", "noop", "--out", sb.path("n")}).code == 0);
      const auto md = slurp(sb.path("n/eval.md"));
      const auto header = md.substr(0, md.find('\n'));
      CHECK(std::count(header.begin(), header.end(), '|') == 3 + 8 + 1);
      CHECK(md.find("0.00 ± 0.00") != std::string::npos);
      const auto csv = slurp(sb.path("n/eval.csv"));
      CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
    }
    SUBCASE("regime b arms") {
      REQUIRE(call({"eval", "--config", cfg, "--policy", "random", "--regime", "b", "--agents", "1,2,3",
                    "--base-scans", "3.0", "--widths", "8", "--out", sb.path("b")})
                  .code == 0);
      const auto csv = slurp(sb.path("b/eval.csv"));
      CHECK(csv.find("\n1,3.0000,1,8,") != std::string::npos);
      CHECK(csv.find("\n2,1.5000,1,8,") != std::string::npos);
      CHECK(csv.find("\n3,1.0000,1,8,") != std::string::npos);
    }
  }

  TEST_CASE("rollout and replay") {
    Sandbox sb;
    std::string text = kTiny;
    text.replace(text.find("max_width = 8"), 13, "max_width = 16\nmax_board_scans = 2.0");
    const auto cfg = sb.write("run.toml", text);
    const auto trace = sb.path("t.jsonl");
    const auto r = call({"rollout", "--config", cfg, "--policy", "random", "--trace", trace, "--render", "ascii",
                         "--frames", "0"});
    REQUIRE(r.code == 0);
    std::ifstream in(trace);
    int lines = 0;
    for (std::string l; std::getline(in, l);) ++lines;
    CHECK(lines == 1 + 1024);
    const auto frame = r.out.substr(r.out.find('\n') + 1);
    for (int row = 0; row < 16; ++row) {
      const auto line = frame.substr(static_cast<std::size_t>(row) * 17, 16);
      for (char ch : line) CHECK(std::string(".#0").find(ch) != std::string::npos);
    }
    const auto rp = call({"replay", "--trace", trace});
    CHECK(rp.code == 0);
    CHECK(rp.out.find("replay identical") != std::string::npos);

    std::ifstream src(trace);
    std::string all((std::istreambuf_iterator<char>(src)), {});
    const auto pos = all.find("\"reward\":", all.find('\n'));
    all.insert(pos + 9, "1");
    const auto bad = sb.write("bad.jsonl", all);
    CHECK(call({"replay", "--trace", bad}).code == 1);
  }

  TEST_CASE("bench reports exact step counts") {
    Sandbox sb;
    const auto cfg = sb.write("run.toml", kTiny);
    REQUIRE(call({"bench", "--config", cfg, "--steps", "300", "--out", sb.path("bench.json")}).code == 0);
    const auto j = nlohmann::json::parse(slurp(sb.path("bench.json")));
    for (const auto& r : j["runs"]) CHECK(r["steps"] == 300);
  }
}
