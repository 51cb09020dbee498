#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pcgswarm/env.hpp"
#include "pcgswarm/policy.hpp"

namespace pcgswarm {

struct TraceHeader {
  EnvConfig config;
  std::uint64_t seed = 0;
  Grid initial_grid;
  std::string policy;
};

struct TraceStep {
  int step = 0;
  std::vector<int> actions;
  double reward = 0.0;
  bool done = false;
};

/// JSON Lines: a header record, then one record per joint step.
struct Trace {
  TraceHeader header;
  std::vector<TraceStep> steps;
};

void write_trace(std::ostream& out, const Trace& trace);
/// Throws std::runtime_error with the offending line number.
Trace read_trace(std::istream& in);

struct Frame {
  int step = 0;
  std::string ascii;
};

struct EpisodeResult {
  Trace trace;
  EnvState final_state;
  double total_reward = 0.0;
  std::vector<Frame> frames;
};

/// Plays one full episode from `seed`, capturing ASCII frames at the
/// requested step counts (0 = initial grid; values past the end are clamped
/// to the last step).
EpisodeResult run_episode(const EnvConfig& config, std::uint64_t seed, const JointPolicy& policy,
                          RngStream policy_rng, const std::vector<int>& frame_steps = {});

struct ReplayResult {
  EnvState final_state;
  double total_reward = 0.0;
  bool identical = true;
  std::optional<int> first_mismatch;  // step number
  std::string message;
};

/// Re-simulates a trace from its header and checks every reward and done
/// flag bit-for-bit.
ReplayResult replay(const Trace& trace);

/// Grid with agents drawn over it as digits 0-7.
std::string render_ascii(const EnvState& state, bool show_agents = true);

}  // namespace pcgswarm
