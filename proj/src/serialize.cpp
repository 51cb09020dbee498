#include "pcgswarm/serialize.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pcgswarm {

using nlohmann::json;

void to_json(json& j, const Grid& g) {
  json rows = json::array();
  for (int r = 0; r < g.height(); ++r) {
    json row = json::array();
    for (int c = 0; c < g.width(); ++c) row.push_back(static_cast<int>(g[g.index(r, c)]));
    rows.push_back(std::move(row));
  }
  j = json{{"domain", to_string(g.domain())},
           {"height", g.height()},
           {"width", g.width()},
           {"cells", std::move(rows)}};
}

void from_json(const json& j, Grid& g) {
  const Domain domain = parse_domain(j.at("domain").get<std::string>());
  const int h = j.at("height").get<int>();
  const int w = j.at("width").get<int>();
  const auto& rows = j.at("cells");
  if (!rows.is_array() || static_cast<int>(rows.size()) != h) {
    throw std::invalid_argument("grid json: cells must hold `height` rows");
  }
  Grid out(h, w, domain);
  for (int r = 0; r < h; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != w) {
      throw std::invalid_argument("grid json: row " + std::to_string(r) + " must hold `width` cells");
    }
    for (int c = 0; c < w; ++c) {
      const int code = row[static_cast<std::size_t>(c)].get<int>();
      if (code < 0 || code >= kNumTileKinds) {
        throw std::invalid_argument("grid json: invalid tile code " + std::to_string(code));
      }
      out.set(r, c, static_cast<Tile>(code));
    }
  }
  g = std::move(out);
}

namespace {

json bound(double x) { return std::isinf(x) ? json(nullptr) : json(x); }

double parse_bound(const json& j, double if_null) {
  return j.is_null() ? if_null : j.get<double>();
}

}  // namespace

void to_json(json& j, const TargetSpec& t) {
  j = json::object();
  for (Metric m : metric_set(t.domain)) {
    j[std::string(metric_name(m))] = json::array({bound(t[m].lo), bound(t[m].hi)});
  }
}

TargetSpec targets_from_json(const json& j, Domain domain) {
  TargetSpec t;
  t.domain = domain;
  for (Metric m : metric_set(domain)) {
    const std::string name(metric_name(m));
    if (!j.contains(name)) throw std::invalid_argument("targets: missing metric '" + name + "'");
    const auto& iv = j.at(name);
    if (!iv.is_array() || iv.size() != 2) {
      throw std::invalid_argument("targets." + name + " must be [lo, hi]");
    }
    t[m] = {parse_bound(iv[0], -kUnbounded), parse_bound(iv[1], kUnbounded)};
  }
  for (const auto& [key, _] : j.items()) {
    const auto m = parse_metric(key);
    bool known = false;
    if (m) {
      for (Metric k : metric_set(domain)) known = known || k == *m;
    }
    if (!known) throw std::invalid_argument("targets: unknown metric '" + key + "'");
  }
  t.validate();
  return t;
}

void to_json(json& j, const RewardWeights& w) {
  j = json::object();
  for (Metric m : metric_set(w.domain)) j[std::string(metric_name(m))] = w[m];
}

RewardWeights weights_from_json(const json& j, Domain domain) {
  RewardWeights w = RewardWeights::uniform(domain);
  for (const auto& [key, value] : j.items()) {
    const auto m = parse_metric(key);
    bool known = false;
    if (m) {
      for (Metric k : metric_set(domain)) known = known || k == *m;
    }
    if (!known) throw std::invalid_argument("weights: unknown metric '" + key + "'");
    w[*m] = value.get<double>();
  }
  w.validate();
  return w;
}

void to_json(json& j, const EnvConfig& c) {
  j = json{{"domain", to_string(c.domain)},
           {"n_agents", c.n_agents},
           {"obs_window", c.obs_window == kFullWindow ? json("full") : json(c.obs_window)},
           {"max_board_scans", c.max_board_scans},
           {"reward_freq", c.reward_freq},
           {"max_width", c.max_width},
           {"randomize_shape", c.randomize_shape},
           {"wall_fraction", c.wall_fraction},
           {"targets", c.targets ? json(*c.targets) : json(nullptr)},
           {"weights", c.weights ? json(*c.weights) : json(nullptr)},
           {"seed", c.seed}};
}

void from_json(const json& j, EnvConfig& c) {
  EnvConfig out;
  out.domain = parse_domain(j.at("domain").get<std::string>());
  out.n_agents = j.at("n_agents").get<int>();
  const auto& win = j.at("obs_window");
  out.obs_window = win.is_string() && win.get<std::string>() == "full" ? kFullWindow : win.get<int>();
  out.max_board_scans = j.at("max_board_scans").get<double>();
  out.reward_freq = j.at("reward_freq").get<int>();
  out.max_width = j.at("max_width").get<int>();
  out.randomize_shape = j.at("randomize_shape").get<bool>();
  out.wall_fraction = j.value("wall_fraction", 0.5);
  if (j.contains("targets") && !j.at("targets").is_null()) {
    out.targets = targets_from_json(j.at("targets"), out.domain);
  }
  if (j.contains("weights") && !j.at("weights").is_null()) {
    out.weights = weights_from_json(j.at("weights"), out.domain);
  }
  out.seed = j.value("seed", std::uint64_t{0});
  c = std::move(out);
}

void to_json(json& j, const PPOConfig& c) {
  j = json{{"gamma", c.gamma},
           {"lambda", c.lambda},
           {"clip", c.clip},
           {"lr", c.lr},
           {"epochs", c.epochs},
           {"minibatches", c.minibatches},
           {"entropy_coef", c.entropy_coef},
           {"value_coef", c.value_coef},
           {"max_grad_norm", c.max_grad_norm},
           {"hidden", c.hidden},
           {"num_envs", c.num_envs},
           {"rollout_len", c.rollout_len},
           {"total_steps", c.total_steps},
           {"adam_eps", c.adam_eps}};
}

void from_json(const json& j, PPOConfig& c) {
  PPOConfig d;
  c.gamma = j.value("gamma", d.gamma);
  c.lambda = j.value("lambda", d.lambda);
  c.clip = j.value("clip", d.clip);
  c.lr = j.value("lr", d.lr);
  c.epochs = j.value("epochs", d.epochs);
  c.minibatches = j.value("minibatches", d.minibatches);
  c.entropy_coef = j.value("entropy_coef", d.entropy_coef);
  c.value_coef = j.value("value_coef", d.value_coef);
  c.max_grad_norm = j.value("max_grad_norm", d.max_grad_norm);
  c.hidden = j.value("hidden", d.hidden);
  c.num_envs = j.value("num_envs", d.num_envs);
  c.rollout_len = j.value("rollout_len", d.rollout_len);
  c.total_steps = j.value("total_steps", d.total_steps);
  c.adam_eps = j.value("adam_eps", d.adam_eps);
}

void to_json(json& j, const MetricsVector& m) {
  j = json::object();
  for (Metric k : metric_set(m.domain)) {
    j[std::string(metric_name(k))] = m[k] ? json(*m[k]) : json(nullptr);
  }
}

}  // namespace pcgswarm
