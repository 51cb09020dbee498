#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pcgswarm/agents.hpp"
#include "pcgswarm/bench.hpp"
#include "pcgswarm/config.hpp"
#include "pcgswarm/env.hpp"
#include "pcgswarm/eval.hpp"
#include "pcgswarm/mappo.hpp"
#include "pcgswarm/pathing.hpp"
#include "pcgswarm/policy.hpp"
#include "pcgswarm/reward.hpp"

namespace py = pybind11;
using namespace pcgswarm;

namespace {

using Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

Grid grid_from_array(const Array& a, Domain d) {
  if (a.ndim() != 2) throw std::invalid_argument("grid must be a 2-D array");
  Grid g(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), d);
  const auto r = a.unchecked<2>();
  for (int i = 0; i < g.height(); ++i)
    for (int j = 0; j < g.width(); ++j) g.set(i, j, static_cast<Tile>(r(i, j)));
  return g;
}

Array grid_to_array(const Grid& g) {
  Array out({g.height(), g.width()});
  std::copy(g.cells().begin(), g.cells().end(), reinterpret_cast<Tile*>(out.mutable_data()));
  return out;
}

py::dict metrics_dict(const MetricsVector& m) {
  py::dict d;
  for (Metric k : metric_set(m.domain)) {
    const auto v = m[k];
    d[py::str(std::string(metric_name(k)))] = v ? py::object(py::int_(*v)) : py::object(py::none());
  }
  return d;
}

/// Stateful wrapper so Python code can drive one episode at a time.
class PyEnv {
 public:
  explicit PyEnv(EnvConfig config) : config_(std::move(config)) {
    config_.validate();
    state_ = reset_state(config_, config_.seed);
  }

  Array reset(std::optional<std::uint64_t> seed) {
    state_ = reset_state(config_, seed.value_or(config_.seed));
    return observations();
  }

  py::tuple step(const std::vector<int>& actions) {
    std::vector<Action> joint;
    for (int a : actions) joint.emplace_back(a);
    const auto out = advance(state_, joint, config_);
    return py::make_tuple(observations(), out.reward, out.done);
  }

  Array observations() const {
    const int w = config_.window();
    const int ch = 1 + config_.n_agents;
    Array out({config_.n_agents, w, w, ch});
    auto* dst = out.mutable_data();
    for (int i = 0; i < config_.n_agents; ++i) {
      const auto o = observe(state_, i, config_);
      dst = std::copy(o.data.begin(), o.data.end(), dst);
    }
    return out;
  }

  const EnvConfig& config() const { return config_; }
  const EnvState& state() const { return state_; }

 private:
  EnvConfig config_;
  EnvState state_;
};

EnvConfig make_config(const std::string& domain, int n_agents, int obs_window, double max_board_scans,
                      int reward_freq, int max_width, bool randomize_shape, std::uint64_t seed) {
  EnvConfig c;
  c.domain = parse_domain(domain);
  c.n_agents = n_agents;
  c.obs_window = obs_window;
  c.max_board_scans = max_board_scans;
  c.reward_freq = reward_freq;
  c.max_width = max_width;
  c.randomize_shape = randomize_shape;
  c.seed = seed;
  c.validate();
  return c;
}

py::dict record_dict(const TrainRecord& r) {
  py::dict d;
  d["step"] = r.step;
  d["mean_episode_reward"] = r.mean_episode_reward;
  d["episodes"] = r.episodes;
  d["surrogate"] = r.surrogate;
  d["value_loss"] = r.value_loss;
  d["entropy"] = r.entropy;
  d["clip_fraction"] = r.clip_fraction;
  d["grad_norm"] = r.grad_norm;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-agent turtle level-generation environment, baselines and trainer";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.attr("AIR") = static_cast<int>(Tile::Air);
  m.attr("WALL") = static_cast<int>(Tile::Wall);
  m.attr("PLAYER") = static_cast<int>(Tile::Player);
  m.attr("KEY") = static_cast<int>(Tile::Key);
  m.attr("DOOR") = static_cast<int>(Tile::Door);
  m.attr("ENEMY") = static_cast<int>(Tile::Enemy);
  m.attr("BORDER") = static_cast<int>(Tile::Border);

  m.def("action_count", [](const std::string& domain) { return action_count(parse_domain(domain)); },
        py::arg("domain"));

  m.def(
      "episode_budget",
      [](double scans, int height, int width) {
        EnvConfig c;
        c.max_board_scans = scans;
        c.max_width = std::max(height, width);
        return episode_budget(c, {height, width, c.max_width});
      },
      py::arg("max_board_scans"), py::arg("height"), py::arg("width"));

  m.def(
      "approx_diameter", [](const Array& g) { return approx_diameter(grid_from_array(g, Domain::Binary)); },
      py::arg("grid"));
  m.def(
      "connected_regions",
      [](const Array& g) { return connected_regions(grid_from_array(g, Domain::Binary), TileMask::air_only()); },
      py::arg("grid"));
  m.def(
      "compute_metrics",
      [](const Array& g, const std::string& domain) {
        return metrics_dict(compute_metrics(grid_from_array(g, parse_domain(domain))));
      },
      py::arg("grid"), py::arg("domain") = "binary");
  m.def(
      "default_loss",
      [](const Array& g, const std::string& domain) {
        const auto grid = grid_from_array(g, parse_domain(domain));
        const MapShape shape{grid.height(), grid.width(), std::max(grid.height(), grid.width())};
        return loss(compute_metrics(grid), default_targets(grid.domain(), shape),
                    RewardWeights::uniform(grid.domain()));
      },
      py::arg("grid"), py::arg("domain") = "binary");

  py::class_<PyEnv>(m, "Env")
      .def(py::init([](const std::string& domain, int n_agents, int obs_window, double max_board_scans,
                       int reward_freq, int max_width, bool randomize_shape, std::uint64_t seed) {
             return PyEnv(make_config(domain, n_agents, obs_window, max_board_scans, reward_freq, max_width,
                                      randomize_shape, seed));
           }), py::arg("domain") = "binary", py::arg("n_agents") = 1,
           py::arg("obs_window") = 3, py::arg("max_board_scans") = 1.0, py::arg("reward_freq") = 1,
           py::arg("max_width") = 16, py::arg("randomize_shape") = false, py::arg("seed") = 0)
      .def("reset", &PyEnv::reset, py::arg("seed") = py::none(),
           "Start an episode; returns observations shaped (agents, window, window, 1 + agents).")
      .def("step", &PyEnv::step, py::arg("actions"), "Apply one joint action; returns (obs, reward, done).")
      .def("observations", &PyEnv::observations)
      .def("greedy_actions",
           [](const PyEnv& e) {
             std::vector<int> out;
             for (int i = 0; i < e.state().n_agents(); ++i) out.push_back(greedy_policy(e.state(), i).index());
             return out;
           })
      .def_property_readonly("grid", [](const PyEnv& e) { return grid_to_array(e.state().grid); })
      .def_property_readonly("positions",
                             [](const PyEnv& e) {
                               std::vector<std::pair<int, int>> out;
                               for (auto p : e.state().positions) out.emplace_back(p.row, p.col);
                               return out;
                             })
      .def_property_readonly("step_count", [](const PyEnv& e) { return e.state().step_count; })
      .def_property_readonly("budget", [](const PyEnv& e) { return e.state().budget; })
      .def_property_readonly("done", [](const PyEnv& e) { return e.state().done(); })
      .def_property_readonly("loss", [](const PyEnv& e) { return current_loss(e.state()); })
      .def_property_readonly("n_actions", [](const PyEnv& e) { return action_count(e.config().domain); });

  m.def(
      "evaluate",
      [](const std::string& policy, int n_agents, std::vector<int> widths, int n_seeds, double max_board_scans,
         int reward_freq, std::uint64_t seed, int threads) {
        EvalSpec spec;
        spec.base.n_agents = n_agents;
        spec.base.max_board_scans = max_board_scans;
        spec.base.reward_freq = reward_freq;
        spec.widths = std::move(widths);
        spec.n_seeds = n_seeds;
        spec.seed = seed;
        spec.threads = threads;
        const auto table = [&] {
          py::gil_scoped_release release;
          return pcgswarm::evaluate(spec, JointPolicy::scripted(parse_policy_tag(policy)));
        }();
        py::list rows;
        for (const auto& c : table.cells) {
          py::dict d;
          d["width"] = c.width;
          d["shape_mode"] = std::string(to_string(c.mode));
          d["mean"] = c.mean;
          d["std"] = c.std;
          d["returns"] = c.returns;
          rows.append(d);
        }
        return rows;
      },
      py::arg("policy") = "greedy", py::arg("n_agents") = 1, py::arg("widths") = std::vector<int>{8, 16, 24, 32},
      py::arg("n_seeds") = 50, py::arg("max_board_scans") = 1.0, py::arg("reward_freq") = 1, py::arg("seed") = 0,
      py::arg("threads") = 1);

  m.def(
      "train",
      [](const std::string& config_path, std::optional<std::int64_t> total_steps, std::optional<std::uint64_t> seed,
         int threads) {
        auto cfg = load_run_config(config_path);
        if (total_steps) cfg.ppo.total_steps = *total_steps;
        if (seed) cfg.seed = cfg.env.seed = *seed;
        cfg.validate();
        TrainOptions opts;
        opts.log_interval = cfg.log_interval;
        opts.threads = threads;
        const auto result = [&] {
          py::gil_scoped_release release;
          return pcgswarm::train(cfg.env, cfg.ppo, cfg.seed, opts);
        }();
        py::list curve;
        for (const auto& r : result.curve) curve.append(record_dict(r));
        return curve;
      },
      py::arg("config"), py::arg("total_steps") = py::none(), py::arg("seed") = py::none(), py::arg("threads") = 1,
      "Train from a TOML run config and return the logged curve.");

  m.def(
      "bench",
      [](int max_width, int n_agents, std::int64_t steps, std::vector<int> freqs) {
        EnvConfig c;
        c.max_width = max_width;
        c.n_agents = n_agents;
        const auto rep = [&] {
          py::gil_scoped_release release;
          return run_bench(c, steps, freqs);
        }();
        py::dict out;
        for (const auto& r : rep.results) out[py::int_(r.reward_freq)] = r.steps_per_second();
        return out;
      },
      py::arg("max_width") = 16, py::arg("n_agents") = 3, py::arg("steps") = 5000,
      py::arg("reward_freqs") = std::vector<int>{1, 10});
}
