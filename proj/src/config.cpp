#include "pcgswarm/config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "toml.hpp"

namespace pcgswarm {

ConfigError::ConfigError(std::string field, const std::string& message, std::optional<int> line)
    : std::runtime_error(message), field_(std::move(field)), line_(line) {}

namespace {

std::optional<int> line_of(const toml::node& n) {
  const auto& src = n.source();
  if (src.begin.line == 0) return std::nullopt;
  return static_cast<int>(src.begin.line);
}

std::string where(const toml::node& n) {
  const auto line = line_of(n);
  return line ? " (line " + std::to_string(*line) + ")" : std::string{};
}

class Section {
 public:
  Section(const toml::table* table, std::string prefix) : table_(table), prefix_(std::move(prefix)) {}

  [[nodiscard]] bool present() const { return table_ != nullptr; }

  [[nodiscard]] std::string key(std::string_view name) const {
    return prefix_.empty() ? std::string(name) : prefix_ + "." + std::string(name);
  }

  const toml::node* find(std::string_view name) {
    seen_.insert(std::string(name));
    return table_ ? table_->get(name) : nullptr;
  }

  const toml::node& require(std::string_view name) {
    const auto* n = find(name);
    if (!n) throw ConfigError(key(name), "missing required field \"" + key(name) + "\"");
    return *n;
  }

  template <typename T>
  T get(std::string_view name, T fallback) {
    const auto* n = find(name);
    return n ? convert<T>(*n, name) : fallback;
  }

  template <typename T>
  T need(std::string_view name) {
    return convert<T>(require(name), name);
  }

  template <typename T>
  T convert(const toml::node& n, std::string_view name) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (auto v = n.value_exact<bool>()) return *v;
      throw type_error(n, name, "a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (auto v = n.value_exact<std::string>()) return *v;
      throw type_error(n, name, "a string");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (n.is_number()) return static_cast<T>(*n.value<double>());
      throw type_error(n, name, "a number");
    } else {
      if (auto v = n.value_exact<std::int64_t>()) {
        if (*v < static_cast<std::int64_t>(std::numeric_limits<T>::min()) ||
            *v > static_cast<std::int64_t>(std::numeric_limits<T>::max())) {
          throw ConfigError(key(name), "field \"" + key(name) + "\" is out of range" + where(n), line_of(n));
        }
        return static_cast<T>(*v);
      }
      throw type_error(n, name, "an integer");
    }
  }

  [[nodiscard]] const toml::table* table() const { return table_; }

  /// Rejects keys that were never looked up.
  void finish(const std::set<std::string>& subtables = {}) const {
    if (!table_) return;
    for (const auto& [k, v] : *table_) {
      const std::string name(k.str());
      if (seen_.count(name) || subtables.count(name)) continue;
      throw ConfigError(key(name), "unknown field \"" + key(name) + "\"" + where(v), line_of(v));
    }
  }

 private:
  ConfigError type_error(const toml::node& n, std::string_view name, const char* expected) const {
    return ConfigError(key(name), "field \"" + key(name) + "\" must be " + expected + where(n), line_of(n));
  }

  const toml::table* table_;
  std::string prefix_;
  std::set<std::string> seen_;
};

Section subsection(Section& parent, std::string_view name) {
  const auto* n = parent.find(name);
  if (n && !n->is_table()) {
    throw ConfigError(parent.key(name), "field \"" + parent.key(name) + "\" must be a table" + where(*n),
                      line_of(*n));
  }
  return Section(n ? n->as_table() : nullptr, parent.key(name));
}

template <typename T, typename Fn>
std::vector<T> read_array(Section& s, std::string_view name, std::vector<T> fallback, Fn&& each) {
  const auto* n = s.find(name);
  if (!n) return fallback;
  const auto* arr = n->as_array();
  if (!arr) throw ConfigError(s.key(name), "field \"" + s.key(name) + "\" must be an array" + where(*n), line_of(*n));
  std::vector<T> out;
  for (const auto& el : *arr) out.push_back(each(el));
  return out;
}

TargetSpec parse_targets(Section s, Domain domain) {
  TargetSpec t;
  t.domain = domain;
  for (Metric m : metric_set(domain)) {
    const std::string name(metric_name(m));
    const auto& n = s.require(name);
    const auto* arr = n.as_array();
    if (!arr || arr->size() != 2 || !(*arr)[0].is_number() || !(*arr)[1].is_number()) {
      throw ConfigError(s.key(name), "field \"" + s.key(name) + "\" must be [lo, hi]" + where(n), line_of(n));
    }
    t[m] = {*(*arr)[0].value<double>(), *(*arr)[1].value<double>()};
  }
  s.finish();
  return t;
}

RewardWeights parse_weights(Section s, Domain domain) {
  RewardWeights w = RewardWeights::uniform(domain);
  for (Metric m : metric_set(domain)) w[m] = s.get<double>(metric_name(m), 1.0);
  s.finish();
  return w;
}

EnvConfig parse_env(Section s) {
  EnvConfig c;
  const auto& domain_node = s.require("domain");
  try {
    c.domain = parse_domain(s.convert<std::string>(domain_node, "domain"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(s.key("domain"), std::string(e.what()) + where(domain_node), line_of(domain_node));
  }
  c.n_agents = s.need<int>("n_agents");
  c.max_width = s.need<int>("max_width");
  if (const auto* win = s.find("obs_window")) {
    if (auto text = win->value_exact<std::string>(); text && *text == "full") {
      c.obs_window = kFullWindow;
    } else {
      c.obs_window = s.convert<int>(*win, "obs_window");
    }
  }
  c.max_board_scans = s.get<double>("max_board_scans", c.max_board_scans);
  c.reward_freq = s.get<int>("reward_freq", c.reward_freq);
  c.randomize_shape = s.get<bool>("randomize_shape", c.randomize_shape);
  c.wall_fraction = s.get<double>("wall_fraction", c.wall_fraction);
  if (auto targets = subsection(s, "targets"); targets.present()) c.targets = parse_targets(targets, c.domain);
  if (auto weights = subsection(s, "weights"); weights.present()) c.weights = parse_weights(weights, c.domain);
  s.finish();
  return c;
}

PPOConfig parse_ppo(Section s) {
  PPOConfig c;
  c.gamma = s.get<double>("gamma", c.gamma);
  c.lambda = s.get<double>("lambda", c.lambda);
  c.clip = s.get<double>("clip", c.clip);
  c.lr = s.get<double>("lr", c.lr);
  c.epochs = s.get<int>("epochs", c.epochs);
  c.minibatches = s.get<int>("minibatches", c.minibatches);
  c.entropy_coef = s.get<double>("entropy_coef", c.entropy_coef);
  c.value_coef = s.get<double>("value_coef", c.value_coef);
  c.max_grad_norm = s.get<double>("max_grad_norm", c.max_grad_norm);
  c.hidden = s.get<int>("hidden", c.hidden);
  c.num_envs = s.get<int>("num_envs", c.num_envs);
  c.rollout_len = s.get<int>("rollout_len", c.rollout_len);
  c.total_steps = s.get<std::int64_t>("total_steps", c.total_steps);
  c.adam_eps = s.get<double>("adam_eps", c.adam_eps);
  s.finish();
  return c;
}

EvalSettings parse_eval(Section s) {
  EvalSettings e;
  e.n_seeds = s.get<int>("n_seeds", e.n_seeds);
  e.widths = read_array<int>(s, "widths", e.widths, [&](const toml::node& n) {
    if (auto v = n.value_exact<std::int64_t>()) return static_cast<int>(*v);
    throw ConfigError(s.key("widths"), "eval.widths entries must be integers" + where(n), line_of(n));
  });
  e.modes = read_array<ShapeMode>(s, "modes", e.modes, [&](const toml::node& n) {
    const auto v = n.value_exact<std::string>();
    try {
      if (v) return parse_shape_mode(*v);
    } catch (const std::invalid_argument&) {
    }
    throw ConfigError(s.key("modes"), "eval.modes entries must be \"fixed\" or \"random\"" + where(n), line_of(n));
  });
  e.policy = s.get<std::string>("policy", e.policy);
  e.checkpoint = s.get<std::string>("checkpoint", e.checkpoint);
  s.finish();
  return e;
}

IoPaths parse_io(Section s) {
  IoPaths io;
  io.checkpoint_dir = s.get<std::string>("checkpoint_dir", io.checkpoint_dir);
  io.trace_dir = s.get<std::string>("trace_dir", io.trace_dir);
  io.results_dir = s.get<std::string>("results_dir", io.results_dir);
  s.finish();
  return io;
}

}  // namespace

void RunConfig::validate() const {
  try {
    env.validate();
    ppo.validate();
    eval_spec().validate();
    parse_policy_tag(eval.policy);
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto space = msg.find(' ');
    const std::string field = msg.substr(0, space);
    throw ConfigError(field.find('.') != std::string::npos ? field : std::string{}, msg);
  }
  if (log_interval < 1) throw ConfigError("log_interval", "log_interval must be >= 1");
  if (threads < 1) throw ConfigError("threads", "threads must be >= 1");
}

EvalSpec RunConfig::eval_spec() const {
  EvalSpec spec;
  spec.base = env;
  spec.n_seeds = eval.n_seeds;
  spec.widths = eval.widths;
  spec.modes = eval.modes;
  spec.seed = seed;
  spec.threads = threads;
  return spec;
}

RunConfig parse_run_config(const std::string& toml_text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(toml_text, source);
  } catch (const toml::parse_error& e) {
    const int line = static_cast<int>(e.source().begin.line);
    throw ConfigError("", source + ":" + std::to_string(line) + ": " + std::string(e.description()), line);
  }

  Section top(&root, "");
  RunConfig cfg;
  const auto seed = top.get<std::int64_t>("seed", 0);
  if (seed < 0) {
    const auto* n = top.find("seed");
    throw ConfigError("seed", "field \"seed\" must be non-negative", n ? line_of(*n) : std::nullopt);
  }
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.log_interval = top.get<std::int64_t>("log_interval", cfg.log_interval);
  cfg.threads = top.get<int>("threads", cfg.threads);

  Section env = subsection(top, "env");
  if (!env.present()) throw ConfigError("env", "missing required table [env]");
  cfg.env = parse_env(env);
  cfg.env.seed = cfg.seed;
  cfg.ppo = parse_ppo(subsection(top, "ppo"));
  cfg.eval = parse_eval(subsection(top, "eval"));
  cfg.io = parse_io(subsection(top, "io"));
  top.finish();

  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path);
}

}  // namespace pcgswarm
