#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "pcgswarm/bench.hpp"
#include "pcgswarm/config.hpp"
#include "pcgswarm/eval.hpp"
#include "pcgswarm/mappo.hpp"
#include "pcgswarm/trace.hpp"

namespace pcgswarm::cli {
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::int64_t seed = -1;
  int threads = 0;
  std::string policy;
  std::string checkpoint;
  std::string regime;
  std::vector<int> agents;
  double base_scans = 0.0;
  int reward_freq = 0;
  std::vector<int> widths;
  int seeds = 0;
  std::string trace;
  std::string render;
  std::vector<int> frames;
  std::int64_t steps = 0;
  std::string out;
};

/// Failure that maps to exit code 1.
struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RunConfig load_with_overrides(const Options& opt) {
  RunConfig cfg = load_run_config(opt.config);
  if (opt.seed >= 0) {
    cfg.seed = static_cast<std::uint64_t>(opt.seed);
    cfg.env.seed = cfg.seed;
  }
  if (opt.threads > 0) cfg.threads = opt.threads;
  if (!opt.widths.empty()) cfg.eval.widths = opt.widths;
  if (opt.seeds > 0) cfg.eval.n_seeds = opt.seeds;
  if (!opt.policy.empty()) cfg.eval.policy = opt.policy;
  if (!opt.checkpoint.empty()) cfg.eval.checkpoint = opt.checkpoint;
  if (opt.reward_freq > 0 && opt.regime.empty()) cfg.env.reward_freq = opt.reward_freq;
  cfg.validate();
  return cfg;
}

JointPolicy resolve_policy(const RunConfig& cfg, const Options& opt) {
  // An explicit --policy beats a checkpoint named in the config file.
  if (!opt.policy.empty() || cfg.eval.checkpoint.empty()) {
    return JointPolicy::scripted(parse_policy_tag(cfg.eval.policy));
  }
  Checkpoint ckpt;
  try {
    ckpt = load_checkpoint(cfg.eval.checkpoint);
  } catch (const std::exception& e) {
    throw RuntimeFailure(e.what());
  }
  return JointPolicy::learned(std::move(ckpt.params), ckpt.env);
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw RuntimeFailure("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw RuntimeFailure("failed writing '" + path.string() + "'");
}

int cmd_train(const Options& opt, std::ostream& out) {
  RunConfig cfg = load_with_overrides(opt);
  if (opt.steps > 0) {
    cfg.ppo.total_steps = opt.steps;
    cfg.validate();
  }
  const fs::path ckpt_dir = opt.out.empty() ? fs::path(cfg.io.checkpoint_dir) : fs::path(opt.out);
  const fs::path results_dir = opt.out.empty() ? fs::path(cfg.io.results_dir) : fs::path(opt.out);

  TrainOptions topt;
  topt.log_interval = cfg.log_interval;
  topt.threads = cfg.threads;
  topt.on_record = [&out](const TrainRecord& r) {
    out << "step " << r.step << "  mean_ep_reward " << std::setprecision(6) << r.mean_episode_reward
        << "  entropy " << r.entropy << '\n';
  };
  TrainResult result;
  try {
    result = train(cfg.env, cfg.ppo, cfg.seed, topt);
  } catch (const std::exception& e) {
    throw RuntimeFailure(std::string("training failed: ") + e.what());
  }

  const fs::path ckpt_path = ckpt_dir / "checkpoint.json";
  const fs::path curve_path = results_dir / "train_curve.csv";
  fs::create_directories(ckpt_dir);
  try {
    save_checkpoint(ckpt_path.string(), {cfg.env, cfg.ppo, result.params, result.adam, result.rng});
  } catch (const std::exception& e) {
    throw RuntimeFailure(e.what());
  }
  write_file(curve_path, curve_to_csv(result.curve));
  out << "checkpoint: " << ckpt_path.string() << "\ncurve: " << curve_path.string() << '\n';
  return kExitOk;
}

int cmd_eval(const Options& opt, std::ostream& out) {
  const RunConfig cfg = load_with_overrides(opt);
  const JointPolicy policy = resolve_policy(cfg, opt);
  const EvalSpec spec = cfg.eval_spec();

  std::vector<EvalTable> tables;
  try {
    if (opt.regime.empty()) {
      policy.check_compatible(spec.base);
      tables.push_back(evaluate(spec, policy));
    } else {
      const BudgetRegime regime = parse_regime(opt.regime);
      const std::vector<int> agents = opt.agents.empty() ? std::vector<int>{cfg.env.n_agents} : opt.agents;
      const double base_scans = opt.base_scans > 0 ? opt.base_scans : cfg.env.max_board_scans;
      const int base_freq = opt.reward_freq > 0 ? opt.reward_freq : cfg.env.reward_freq;
      tables = trend_experiment(agents, regime, spec, policy, base_scans, base_freq).tables;
    }
  } catch (const std::invalid_argument& e) {
    throw RuntimeFailure(e.what());
  }

  const fs::path dir = opt.out.empty() ? fs::path(cfg.io.results_dir) : fs::path(opt.out);
  const std::string md = to_markdown(tables);
  write_file(dir / "eval.csv", to_csv(tables));
  write_file(dir / "eval.md", md);
  out << "policy: " << policy.name() << ", " << spec.n_seeds << " seeds per cell\n" << md;
  out << "results: " << (dir / "eval.csv").string() << '\n';
  return kExitOk;
}

int cmd_rollout(const Options& opt, std::ostream& out) {
  const RunConfig cfg = load_with_overrides(opt);
  const JointPolicy policy = resolve_policy(cfg, opt);
  if (!opt.render.empty() && opt.render != "ascii") {
    throw CLI::ValidationError("--render", "only 'ascii' rendering is supported");
  }

  EnvState probe = reset_state(cfg.env, cfg.env.seed);
  std::vector<int> frames;
  for (int f : opt.frames) frames.push_back(f < 0 ? probe.budget : f);
  if (!opt.render.empty() && frames.empty()) frames = {0, probe.budget};

  EpisodeResult ep;
  try {
    ep = run_episode(cfg.env, cfg.env.seed, policy, RngStream(cfg.env.seed).split("policy"), frames);
  } catch (const std::invalid_argument& e) {
    throw RuntimeFailure(e.what());
  }

  if (!opt.trace.empty()) {
    const fs::path path(opt.trace);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw RuntimeFailure("cannot write trace '" + opt.trace + "'");
    write_trace(f, ep.trace);
    if (!f) throw RuntimeFailure("failed writing trace '" + opt.trace + "'");
  }
  if (!opt.render.empty()) {
    for (const auto& fr : ep.frames) out << "t=" << fr.step << '\n' << fr.ascii << '\n';
  }
  out << "steps " << ep.trace.steps.size() << "  episode_reward " << std::setprecision(10) << ep.total_reward
      << "  final_loss " << current_loss(ep.final_state) << "  grid_hash " << std::hex << std::setw(16)
      << std::setfill('0') << ep.final_state.grid.hash() << std::dec << std::setfill(' ') << '\n';
  return kExitOk;
}

int cmd_replay(const Options& opt, std::ostream& out) {
  std::ifstream f(opt.trace);
  if (!f) throw RuntimeFailure("cannot open trace '" + opt.trace + "'");
  const Trace trace = read_trace(f);
  const ReplayResult r = replay(trace);
  out << "steps " << trace.steps.size() << "  episode_reward " << std::setprecision(10) << r.total_reward
      << "  grid_hash " << std::hex << std::setw(16) << std::setfill('0') << r.final_state.grid.hash() << std::dec
      << std::setfill(' ') << '\n';
  if (!r.identical) throw RuntimeFailure("replay diverged: " + r.message);
  out << "replay identical\n";
  return kExitOk;
}

int cmd_bench(const Options& opt, std::ostream& out) {
  const RunConfig cfg = load_with_overrides(opt);
  const std::int64_t steps = opt.steps > 0 ? opt.steps : 20'000;
  const BenchReport report = run_bench(cfg.env, steps, {1, 10}, cfg.seed);
  for (const auto& r : report.results) {
    out << "reward_freq " << r.reward_freq << ": " << r.steps << " joint steps in " << std::setprecision(4)
        << r.seconds << " s  -> " << std::setprecision(6) << r.steps_per_second() << " steps/s, "
        << r.reward_computations_per_second() << " reward computations/s\n";
  }
  const fs::path path = opt.out.empty() ? fs::path(cfg.io.results_dir) / "bench.json" : fs::path(opt.out);
  write_file(path, report.to_json() + "\n");
  out << "report: " << path.string() << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-agent level generation: train, evaluate, roll out, replay, benchmark", "pcg-swarm"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Run configuration (TOML)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "Override the run seed")->check(CLI::NonNegativeNumber);
    sub->add_option("--threads", opt.threads, "Worker thread cap")->envname("PCG_SWARM_THREADS")->check(CLI::PositiveNumber);
  };
  auto add_policy = [&opt](CLI::App* sub) {
    sub->add_option("--policy", opt.policy, "Scripted policy")->check(CLI::IsMember({"random", "greedy", "noop"}));
    sub->add_option("--checkpoint", opt.checkpoint, "Trained checkpoint");
  };

  auto* train_cmd = app.add_subcommand("train", "Train a shared MAPPO policy");
  add_common(train_cmd);
  train_cmd->add_option("--steps", opt.steps, "Override ppo.total_steps")->check(CLI::PositiveNumber);
  train_cmd->add_option("--out", opt.out, "Directory for checkpoint and curve (default from [io])");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a policy across map widths and shape modes");
  add_common(eval_cmd);
  add_policy(eval_cmd);
  eval_cmd->add_option("--regime", opt.regime, "Budget regime for a trend experiment")->check(CLI::IsMember({"a", "b", "c"}));
  eval_cmd->add_option("--agents", opt.agents, "Agent counts, e.g. 1,2,3")->delimiter(',');
  eval_cmd->add_option("--base-scans", opt.base_scans, "Base board scans for the regime")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--reward-freq", opt.reward_freq, "Reward frequency (base value under a regime)")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--widths", opt.widths, "Map widths, e.g. 8,16,24,32")->delimiter(',');
  eval_cmd->add_option("--seeds", opt.seeds, "Episodes per cell")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--out", opt.out, "Results directory (default from [io])");

  auto* rollout_cmd = app.add_subcommand("rollout", "Play one episode and write a replayable trace");
  add_common(rollout_cmd);
  add_policy(rollout_cmd);
  rollout_cmd->add_option("--trace", opt.trace, "Trace output (JSON Lines)");
  rollout_cmd->add_option("--render", opt.render, "Frame renderer")->check(CLI::IsMember({"ascii"}));
  rollout_cmd->add_option("--frames", opt.frames, "Steps to render; -1 is the last step")->delimiter(',');

  auto* replay_cmd = app.add_subcommand("replay", "Re-simulate a trace and verify it bit-for-bit");
  replay_cmd->add_option("--trace", opt.trace, "Trace file")->required()->check(CLI::ExistingFile);

  auto* bench_cmd = app.add_subcommand("bench", "Measure environment throughput at reward frequency 1 and 10");
  add_common(bench_cmd);
  bench_cmd->add_option("--steps", opt.steps, "Joint steps per measurement")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--out", opt.out, "JSON report path (default results_dir/bench.json)");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(opt, out);
    if (eval_cmd->parsed()) return cmd_eval(opt, out);
    if (rollout_cmd->parsed()) return cmd_rollout(opt, out);
    if (replay_cmd->parsed()) return cmd_replay(opt, out);
    if (bench_cmd->parsed()) return cmd_bench(opt, out);
  } catch (const ConfigError& e) {
    err << "config error";
    if (!e.field().empty()) err << " [" << e.field() << "]";
    err << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace pcgswarm::cli
