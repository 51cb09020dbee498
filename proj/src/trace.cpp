#include "pcgswarm/trace.hpp"

#include <algorithm>
#include <bit>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "pcgswarm/serialize.hpp"

namespace pcgswarm {

using nlohmann::json;

void write_trace(std::ostream& out, const Trace& trace) {
  const json header{{"type", "header"},
                    {"config", trace.header.config},
                    {"seed", trace.header.seed},
                    {"policy", trace.header.policy},
                    {"initial_grid", trace.header.initial_grid}};
  out << header.dump() << '\n';
  for (const auto& s : trace.steps) {
    const json rec{{"step", s.step}, {"actions", s.actions}, {"reward", s.reward}, {"done", s.done}};
    out << rec.dump() << '\n';
  }
  if (!out) throw std::runtime_error("failed writing trace");
}

Trace read_trace(std::istream& in) {
  Trace trace;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (!have_header) {
        if (j.value("type", "") != "header") throw std::runtime_error("first record is not a header");
        trace.header.config = j.at("config").get<EnvConfig>();
        trace.header.seed = j.at("seed").get<std::uint64_t>();
        trace.header.policy = j.value("policy", "");
        trace.header.initial_grid = j.at("initial_grid").get<Grid>();
        have_header = true;
        continue;
      }
      TraceStep s;
      s.step = j.at("step").get<int>();
      s.actions = j.at("actions").get<std::vector<int>>();
      s.reward = j.at("reward").get<double>();
      s.done = j.at("done").get<bool>();
      trace.steps.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw std::runtime_error("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw std::runtime_error("trace has no header record");
  return trace;
}

std::string render_ascii(const EnvState& state, bool show_agents) {
  std::string out = state.grid.to_ascii();
  if (!show_agents) return out;
  const auto stride = static_cast<std::size_t>(state.grid.width() + 1);
  for (int i = 0; i < state.n_agents(); ++i) {
    const Cell p = state.positions[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(p.row) * stride + static_cast<std::size_t>(p.col)] = static_cast<char>('0' + i);
  }
  return out;
}

EpisodeResult run_episode(const EnvConfig& config, std::uint64_t seed, const JointPolicy& policy,
                          RngStream policy_rng, const std::vector<int>& frame_steps) {
  policy.check_compatible(config);
  EpisodeResult res;
  res.final_state = reset_state(config, seed);
  EnvState& state = res.final_state;
  res.trace.header = {config, seed, state.grid, policy.name()};
  res.trace.header.config.seed = seed;

  std::vector<int> wanted = frame_steps;
  for (int& f : wanted) f = std::clamp(f, 0, state.budget);
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
  auto capture = [&] {
    if (std::binary_search(wanted.begin(), wanted.end(), state.step_count)) {
      res.frames.push_back({state.step_count, render_ascii(state, false)});
    }
  };

  capture();
  res.trace.steps.reserve(static_cast<std::size_t>(state.budget));
  while (!state.done()) {
    const auto actions = policy.act(state, config, policy_rng);
    const StepOutcome o = advance(state, actions, config);
    TraceStep rec{state.step_count, {}, o.reward, o.done};
    rec.actions.reserve(actions.size());
    for (Action a : actions) rec.actions.push_back(a.index());
    res.trace.steps.push_back(std::move(rec));
    res.total_reward += o.reward;
    capture();
  }
  return res;
}

ReplayResult replay(const Trace& trace) {
  ReplayResult res;
  const EnvConfig& config = trace.header.config;
  res.final_state = reset_state(config, trace.header.seed);
  EnvState& state = res.final_state;
  auto mismatch = [&res](int step, std::string msg) {
    if (res.identical) {
      res.identical = false;
      res.first_mismatch = step;
      res.message = std::move(msg);
    }
  };
  if (!(state.grid == trace.header.initial_grid)) mismatch(0, "initial grid differs from header");

  std::vector<Action> actions;
  for (const auto& rec : trace.steps) {
    if (state.done()) {
      mismatch(rec.step, "trace continues past the episode budget");
      break;
    }
    actions.clear();
    for (int a : rec.actions) actions.emplace_back(a);
    const StepOutcome o = advance(state, actions, config);
    res.total_reward += o.reward;
    if (state.step_count != rec.step) mismatch(rec.step, "step counter differs");
    if (std::bit_cast<std::uint64_t>(o.reward) != std::bit_cast<std::uint64_t>(rec.reward)) {
      mismatch(rec.step, "reward differs at step " + std::to_string(rec.step));
    }
    if (o.done != rec.done) mismatch(rec.step, "done flag differs at step " + std::to_string(rec.step));
  }
  return res;
}

}  // namespace pcgswarm
