#include "pcgswarm/mappo.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pcgswarm/parallel.hpp"
#include "pcgswarm/serialize.hpp"

namespace pcgswarm {

// ---------------------------------------------------------------------------
// Observation features

int feature_size(Domain domain, int window, int n_agents) {
  const int tile_kinds = TileSet::for_domain(domain).size();
  return window * window * (tile_kinds + 1 + n_agents);
}

void encode_observation(const Observation& obs, Domain domain, std::span<double> out) {
  const int kinds = TileSet::for_domain(domain).size();
  const int per_cell = kinds + 1 + obs.n_agents;
  if (static_cast<int>(out.size()) != obs.window * obs.window * per_cell) {
    throw std::invalid_argument("encode_observation: output span has the wrong length");
  }
  std::fill(out.begin(), out.end(), 0.0);
  const int channels = obs.channels();
  const int cells = obs.window * obs.window;
  for (int cell = 0; cell < cells; ++cell) {
    const auto src = static_cast<std::size_t>(cell) * static_cast<std::size_t>(channels);
    const auto dst = static_cast<std::size_t>(cell) * static_cast<std::size_t>(per_cell);
    const auto code = obs.data[src];
    const int slot = code == static_cast<std::uint8_t>(Tile::Border) ? kinds : static_cast<int>(code);
    out[dst + static_cast<std::size_t>(slot)] = 1.0;
    for (int k = 0; k < obs.n_agents; ++k) {
      out[dst + static_cast<std::size_t>(kinds + 1 + k)] = obs.data[src + 1 + static_cast<std::size_t>(k)];
    }
  }
}

Eigen::VectorXd encode_observation(const Observation& obs, Domain domain) {
  Eigen::VectorXd v(feature_size(domain, obs.window, obs.n_agents));
  encode_observation(obs, domain, std::span<double>(v.data(), static_cast<std::size_t>(v.size())));
  return v;
}

// ---------------------------------------------------------------------------
// Parameters

PolicyParams::PolicyParams(int input_size, int hidden, int n_actions)
    : input_(input_size), hidden_(hidden), actions_(n_actions) {
  if (input_size <= 0 || hidden <= 0 || n_actions <= 0) {
    throw std::invalid_argument("policy dimensions must be positive");
  }
  layout();
}

void PolicyParams::layout() {
  const Eigen::Index in = input_, h = hidden_, a = actions_;
  off_ab1_ = h * in;
  off_aw2_ = off_ab1_ + h;
  off_ab2_ = off_aw2_ + a * h;
  off_cw1_ = off_ab2_ + a;
  off_cb1_ = off_cw1_ + h * in;
  off_cw2_ = off_cb1_ + h;
  off_cb2_ = off_cw2_ + h;
  flat_ = Eigen::VectorXd::Zero(off_cb2_ + 1);
}

PolicyParams PolicyParams::init(int input_size, int hidden, int n_actions, RngStream& rng) {
  PolicyParams p(input_size, hidden, n_actions);
  auto fill = [&rng](auto block, double fan_in, double fan_out, double gain) {
    const double a = gain * std::sqrt(6.0 / (fan_in + fan_out));
    for (Eigen::Index j = 0; j < block.cols(); ++j) {
      for (Eigen::Index i = 0; i < block.rows(); ++i) block(i, j) = a * (2.0 * rng.uniform01() - 1.0);
    }
  };
  fill(p.actor_w1(), input_size, hidden, 1.0);
  fill(p.actor_w2(), hidden, n_actions, 0.01);
  fill(p.critic_w1(), input_size, hidden, 1.0);
  fill(p.critic_w2(), hidden, 1, 1.0);
  return p;
}

std::string PolicyParams::block_of(Eigen::Index i) const {
  if (i < off_ab1_) return "actor.w1";
  if (i < off_aw2_) return "actor.b1";
  if (i < off_ab2_) return "actor.w2";
  if (i < off_cw1_) return "actor.b2";
  if (i < off_cb1_) return "critic.w1";
  if (i < off_cw2_) return "critic.b1";
  if (i < off_cb2_) return "critic.w2";
  return "critic.b2";
}

// ---------------------------------------------------------------------------
// Forward

namespace {

struct Activations {
  Eigen::MatrixXd actor_hidden;   // h x B
  Eigen::MatrixXd critic_hidden;  // h x B
  Eigen::MatrixXd log_probs;      // A x B
  Eigen::RowVectorXd values;      // 1 x B
};

Activations forward(const PolicyParams& p, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  if (x.rows() != p.input_size()) {
    throw std::invalid_argument("observation has " + std::to_string(x.rows()) +
                                " features, policy expects " + std::to_string(p.input_size()));
  }
  Activations act;
  act.actor_hidden = ((p.actor_w1() * x).colwise() + p.actor_b1()).array().tanh();
  Eigen::MatrixXd logits = (p.actor_w2() * act.actor_hidden).colwise() + p.actor_b2();
  const Eigen::RowVectorXd peak = logits.colwise().maxCoeff();
  logits.rowwise() -= peak;
  const Eigen::RowVectorXd lse = logits.array().exp().colwise().sum().log().matrix();
  logits.rowwise() -= lse;
  act.log_probs = std::move(logits);

  act.critic_hidden = ((p.critic_w1() * x).colwise() + p.critic_b1()).array().tanh();
  act.values = (p.critic_w2() * act.critic_hidden).array() + p.critic_b2()(0);
  return act;
}

}  // namespace

PolicyOutput policy_forward(const PolicyParams& params, const Eigen::Ref<const Eigen::VectorXd>& features) {
  const Activations act = forward(params, features);
  PolicyOutput out;
  out.log_probs = act.log_probs.col(0);
  out.probs = out.log_probs.array().exp();
  out.value = act.values(0);
  return out;
}

BatchOutput policy_forward_batch(const PolicyParams& params, const Eigen::Ref<const Eigen::MatrixXd>& features) {
  Activations act = forward(params, features);
  return {std::move(act.log_probs), act.values.transpose()};
}

int sample_action(const Eigen::Ref<const Eigen::VectorXd>& probs, RngStream& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs(i);
    if (u < acc) return static_cast<int>(i);
  }
  // Rounding left u above the total mass; take the last action with support.
  for (Eigen::Index i = probs.size() - 1; i >= 0; --i) {
    if (probs(i) > 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

// ---------------------------------------------------------------------------
// Config, GAE

void PPOConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (!(gamma > 0.0 && gamma <= 1.0)) fail("ppo.gamma must lie in (0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail("ppo.lambda must lie in [0, 1]");
  if (!(clip > 0.0 && clip < 1.0)) fail("ppo.clip must lie in (0, 1)");
  if (!(lr >= 0.0) || !std::isfinite(lr)) fail("ppo.lr must be finite and non-negative");
  if (epochs < 1) fail("ppo.epochs must be >= 1");
  if (minibatches < 1) fail("ppo.minibatches must be >= 1");
  if (!(entropy_coef >= 0.0)) fail("ppo.entropy_coef must be non-negative");
  if (!(value_coef >= 0.0)) fail("ppo.value_coef must be non-negative");
  if (hidden < 1) fail("ppo.hidden must be >= 1");
  if (num_envs < 1) fail("ppo.num_envs must be >= 1");
  if (rollout_len < 1) fail("ppo.rollout_len must be >= 1");
  if (total_steps < 1) fail("ppo.total_steps must be >= 1");
  if (total_steps % num_envs != 0) fail("ppo.total_steps must be a multiple of ppo.num_envs");
  if (!(adam_eps > 0.0)) fail("ppo.adam_eps must be positive");
}

std::vector<double> gae(std::span<const double> rewards, std::span<const double> values,
                        std::span<const std::uint8_t> dones, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n + 1 || dones.size() != n) {
    throw std::invalid_argument("gae: need T rewards, T dones and T+1 values");
  }
  std::vector<double> adv(n);
  double next = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double live = dones[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * values[k + 1] * live - values[k];
    next = delta + gamma * lambda * live * next;
    adv[k] = next;
  }
  return adv;
}

// ---------------------------------------------------------------------------
// Objective and gradient

ObjectiveTerms ppo_objective(const PolicyParams& params, const Eigen::Ref<const Eigen::MatrixXd>& features,
                             std::span<const int> actions, std::span<const double> old_log_probs,
                             std::span<const double> advantages, std::span<const double> returns,
                             const PPOConfig& config, Eigen::VectorXd* grad) {
  const Eigen::Index batch = features.cols();
  if (batch == 0 || static_cast<Eigen::Index>(actions.size()) != batch ||
      static_cast<Eigen::Index>(old_log_probs.size()) != batch ||
      static_cast<Eigen::Index>(advantages.size()) != batch ||
      static_cast<Eigen::Index>(returns.size()) != batch) {
    throw std::invalid_argument("ppo_objective: inconsistent batch lengths");
  }
  const Activations act = forward(params, features);
  const double inv_b = 1.0 / static_cast<double>(batch);
  const double eps = config.clip;

  ObjectiveTerms terms;
  Eigen::MatrixXd d_logits;
  Eigen::RowVectorXd d_values;
  if (grad) {
    d_logits.setZero(params.n_actions(), batch);
    d_values.setZero(batch);
  }

  for (Eigen::Index i = 0; i < batch; ++i) {
    const auto a = static_cast<Eigen::Index>(actions[static_cast<std::size_t>(i)]);
    const double adv = advantages[static_cast<std::size_t>(i)];
    const double log_ratio = act.log_probs(a, i) - old_log_probs[static_cast<std::size_t>(i)];
    const double ratio = std::exp(log_ratio);
    const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
    const double unclipped_term = ratio * adv;
    const double clipped_term = clipped * adv;
    const bool unclipped_active = unclipped_term <= clipped_term;
    terms.surrogate += std::min(unclipped_term, clipped_term);

    const auto lp = act.log_probs.col(i);
    const Eigen::VectorXd p = lp.array().exp();
    const double entropy = -(p.array() * lp.array()).sum();
    terms.entropy += entropy;

    const double err = act.values(i) - returns[static_cast<std::size_t>(i)];
    terms.value_loss += err * err;
    terms.clip_fraction += std::abs(ratio - 1.0) > eps ? 1.0 : 0.0;
    terms.approx_kl += (ratio - 1.0) - log_ratio;

    if (grad) {
      auto dz = d_logits.col(i);
      if (unclipped_active && adv != 0.0) {
        const double g = adv * ratio * inv_b;
        dz -= g * p;
        dz(a) += g;
      }
      if (config.entropy_coef != 0.0) {
        dz.array() -= config.entropy_coef * inv_b * p.array() * (lp.array() + entropy);
      }
      d_values(i) = -2.0 * config.value_coef * inv_b * err;
    }
  }
  terms.surrogate *= inv_b;
  terms.entropy *= inv_b;
  terms.value_loss *= inv_b;
  terms.clip_fraction *= inv_b;
  terms.approx_kl *= inv_b;

  if (grad) {
    PolicyParams g(params.input_size(), params.hidden(), params.n_actions());

    g.actor_w2() = d_logits * act.actor_hidden.transpose();
    g.actor_b2() = d_logits.rowwise().sum();
    const Eigen::MatrixXd d_actor_pre =
        ((params.actor_w2().transpose() * d_logits).array() * (1.0 - act.actor_hidden.array().square())).matrix();
    g.actor_w1() = d_actor_pre * features.transpose();
    g.actor_b1() = d_actor_pre.rowwise().sum();

    g.critic_w2() = d_values * act.critic_hidden.transpose();
    g.critic_b2()(0) = d_values.sum();
    const Eigen::MatrixXd d_critic_pre =
        ((params.critic_w2().transpose() * d_values).array() * (1.0 - act.critic_hidden.array().square())).matrix();
    g.critic_w1() = d_critic_pre * features.transpose();
    g.critic_b1() = d_critic_pre.rowwise().sum();

    *grad = std::move(g.flat());
  }
  return terms;
}

// ---------------------------------------------------------------------------
// Update

namespace {

Eigen::MatrixXd encode_columns(const Batch& batch, std::span<const std::size_t> idx, int input_size) {
  Eigen::MatrixXd x(input_size, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    encode_observation(batch.observations[idx[k]], batch.domain,
                       std::span<double>(x.col(static_cast<Eigen::Index>(k)).data(),
                                         static_cast<std::size_t>(input_size)));
  }
  return x;
}

void check_finite(const PolicyParams& params, const Eigen::VectorXd& grad) {
  for (Eigen::Index i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad(i))) {
      throw std::runtime_error("non-finite gradient in " + params.block_of(i) + " at flat index " +
                               std::to_string(i));
    }
  }
}

}  // namespace

UpdateStats ppo_update(PolicyParams& params, AdamState& adam, const Batch& batch,
                       const PPOConfig& config, RngStream& rng) {
  const std::size_t n = batch.size();
  if (n == 0) throw std::invalid_argument("ppo_update: empty batch");
  if (batch.observations.size() != n || batch.log_probs.size() != n ||
      batch.advantages.size() != n || batch.returns.size() != n) {
    throw std::invalid_argument("ppo_update: inconsistent batch lengths");
  }
  if (adam.m.size() != params.size()) {
    adam.m = Eigen::VectorXd::Zero(params.size());
    adam.v = Eigen::VectorXd::Zero(params.size());
    adam.t = 0;
  }

  const double mean = std::accumulate(batch.advantages.begin(), batch.advantages.end(), 0.0) /
                      static_cast<double>(n);
  double var = 0.0;
  for (double a : batch.advantages) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  std::vector<double> norm_adv(n);
  for (std::size_t i = 0; i < n; ++i) norm_adv[i] = (batch.advantages[i] - mean) / (sd + 1e-8);

  const int mb_count = std::min<int>(config.minibatches, static_cast<int>(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;

  UpdateStats stats;
  Eigen::VectorXd grad;
  std::vector<int> mb_actions;
  std::vector<double> mb_logp, mb_adv, mb_ret;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_below(i)]);

    EpochStats es;
    for (int mb = 0; mb < mb_count; ++mb) {
      const std::size_t begin = n * static_cast<std::size_t>(mb) / static_cast<std::size_t>(mb_count);
      const std::size_t end = n * static_cast<std::size_t>(mb + 1) / static_cast<std::size_t>(mb_count);
      const std::span<const std::size_t> idx(order.data() + begin, end - begin);

      mb_actions.clear();
      mb_logp.clear();
      mb_adv.clear();
      mb_ret.clear();
      for (std::size_t k : idx) {
        mb_actions.push_back(batch.actions[k]);
        mb_logp.push_back(batch.log_probs[k]);
        mb_adv.push_back(norm_adv[k]);
        mb_ret.push_back(batch.returns[k]);
      }
      const Eigen::MatrixXd x = encode_columns(batch, idx, params.input_size());
      const ObjectiveTerms t =
          ppo_objective(params, x, mb_actions, mb_logp, mb_adv, mb_ret, config, &grad);
      check_finite(params, grad);

      const double gnorm = grad.norm();
      if (config.max_grad_norm > 0.0 && gnorm > config.max_grad_norm) {
        grad *= config.max_grad_norm / gnorm;
      }
      ++adam.t;
      adam.m = kBeta1 * adam.m + (1.0 - kBeta1) * grad;
      adam.v = kBeta2 * adam.v + (1.0 - kBeta2) * grad.cwiseProduct(grad);
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam.t));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam.t));
      // Ascent: the objective is maximized.
      params.flat().array() +=
          config.lr * (adam.m.array() / c1) / ((adam.v.array() / c2).sqrt() + config.adam_eps);

      es.terms.surrogate += t.surrogate / mb_count;
      es.terms.value_loss += t.value_loss / mb_count;
      es.terms.entropy += t.entropy / mb_count;
      es.terms.clip_fraction += t.clip_fraction / mb_count;
      es.terms.approx_kl += t.approx_kl / mb_count;
      es.grad_norm += gnorm / mb_count;
    }
    stats.epochs.push_back(es);
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Training loop

namespace {

std::uint64_t episode_seed(const RngStream& root, int env, std::int64_t episode) {
  auto s = root.split("env", static_cast<std::uint64_t>(env)).split(static_cast<std::uint64_t>(episode));
  return s.next_u64();
}

}  // namespace

std::vector<Action> learned_joint_action(const PolicyParams& params, const EnvState& state,
                                         const EnvConfig& config, RngStream& rng) {
  const int n = state.n_agents();
  Eigen::MatrixXd x(params.input_size(), n);
  for (int i = 0; i < n; ++i) {
    const Observation obs = observe(state, i, config);
    if (feature_size(config.domain, obs.window, obs.n_agents) != params.input_size()) {
      throw std::invalid_argument("observation has " +
                                  std::to_string(feature_size(config.domain, obs.window, obs.n_agents)) +
                                  " features, policy expects " + std::to_string(params.input_size()));
    }
    encode_observation(obs, config.domain,
                       std::span<double>(x.col(i).data(), static_cast<std::size_t>(params.input_size())));
  }
  const BatchOutput out = policy_forward_batch(params, x);
  std::vector<Action> actions;
  actions.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd p = out.log_probs.col(i).array().exp();
    actions.emplace_back(sample_action(p, rng));
  }
  return actions;
}

TrainResult train(const EnvConfig& env, const PPOConfig& ppo, std::uint64_t seed,
                  const TrainOptions& options) {
  env.validate();
  ppo.validate();
  if (options.log_interval < 1) throw std::invalid_argument("log_interval must be >= 1");

  const int n_envs = ppo.num_envs;
  const int n_agents = env.n_agents;
  const int window = env.window();
  const int input = feature_size(env.domain, window, n_agents);
  const int n_actions = action_count(env.domain);
  const RngStream root(seed);

  TrainResult result;
  auto init_rng = root.split("init");
  result.params = PolicyParams::init(input, ppo.hidden, n_actions, init_rng);
  result.rng = root.split("update");

  std::vector<EnvState> envs(static_cast<std::size_t>(n_envs));
  std::vector<std::vector<Observation>> obs(static_cast<std::size_t>(n_envs));
  std::vector<std::int64_t> episode_index(static_cast<std::size_t>(n_envs), 0);
  std::vector<double> running_return(static_cast<std::size_t>(n_envs), 0.0);
  std::vector<RngStream> act_rng;
  for (int e = 0; e < n_envs; ++e) {
    act_rng.push_back(root.split("actions", static_cast<std::uint64_t>(e)));
    auto r = reset(env, episode_seed(root, e, 0));
    envs[static_cast<std::size_t>(e)] = std::move(r.state);
    obs[static_cast<std::size_t>(e)] = std::move(r.observations);
  }

  constexpr std::size_t kRewardWindow = 100;
  std::vector<double> recent_returns;
  std::size_t recent_next = 0;
  std::int64_t episodes_done = 0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EpochStats latest{{nan, nan, nan, nan, nan}, nan};

  std::int64_t steps_done = 0;
  const std::int64_t per_env_total = ppo.total_steps / n_envs;
  const std::size_t slots = static_cast<std::size_t>(n_envs) * static_cast<std::size_t>(n_agents);

  Eigen::MatrixXd x(input, static_cast<Eigen::Index>(slots));
  std::vector<std::vector<Action>> joint(static_cast<std::size_t>(n_envs));
  std::vector<StepOutcome> outcomes(static_cast<std::size_t>(n_envs));

  while (steps_done < ppo.total_steps) {
    const auto horizon = static_cast<int>(std::min<std::int64_t>(ppo.rollout_len, per_env_total - steps_done / n_envs));
    const std::size_t rows = static_cast<std::size_t>(horizon) * slots;

    Batch batch;
    batch.domain = env.domain;
    batch.obs_window = window;
    batch.n_agents = n_agents;
    batch.observations.reserve(rows);
    batch.actions.reserve(rows);
    batch.log_probs.reserve(rows);
    batch.values.reserve(rows);
    // Shared reward and termination per (t, env).
    std::vector<double> rewards(static_cast<std::size_t>(horizon) * static_cast<std::size_t>(n_envs));
    std::vector<std::uint8_t> dones(rewards.size());

    for (int t = 0; t < horizon; ++t) {
      for (int e = 0; e < n_envs; ++e) {
        for (int a = 0; a < n_agents; ++a) {
          const auto col = static_cast<Eigen::Index>(e * n_agents + a);
          encode_observation(obs[static_cast<std::size_t>(e)][static_cast<std::size_t>(a)], env.domain,
                             std::span<double>(x.col(col).data(), static_cast<std::size_t>(input)));
        }
      }
      const BatchOutput out = policy_forward_batch(result.params, x);
      for (int e = 0; e < n_envs; ++e) {
        auto& acts = joint[static_cast<std::size_t>(e)];
        acts.clear();
        for (int a = 0; a < n_agents; ++a) {
          const auto col = static_cast<Eigen::Index>(e * n_agents + a);
          const Eigen::VectorXd p = out.log_probs.col(col).array().exp();
          const int choice = sample_action(p, act_rng[static_cast<std::size_t>(e)]);
          acts.emplace_back(choice);
          batch.observations.push_back(std::move(obs[static_cast<std::size_t>(e)][static_cast<std::size_t>(a)]));
          batch.actions.push_back(choice);
          batch.log_probs.push_back(out.log_probs(choice, col));
          batch.values.push_back(out.values(col));
        }
      }

      parallel_for(n_envs, options.threads, [&](int e) {
        const auto ue = static_cast<std::size_t>(e);
        outcomes[ue] = advance(envs[ue], joint[ue], env);
        if (outcomes[ue].done) {
          ++episode_index[ue];
          auto r = reset(env, episode_seed(root, e, episode_index[ue]));
          envs[ue] = std::move(r.state);
          obs[ue] = std::move(r.observations);
        } else {
          obs[ue] = observe_all(envs[ue], env);
        }
      });

      for (int e = 0; e < n_envs; ++e) {
        const auto ue = static_cast<std::size_t>(e);
        const auto slot = static_cast<std::size_t>(t) * static_cast<std::size_t>(n_envs) + ue;
        rewards[slot] = outcomes[ue].reward;
        dones[slot] = outcomes[ue].done ? 1 : 0;
        running_return[ue] += outcomes[ue].reward;
        if (outcomes[ue].done) {
          if (recent_returns.size() < kRewardWindow) {
            recent_returns.push_back(running_return[ue]);
          } else {
            recent_returns[recent_next] = running_return[ue];
            recent_next = (recent_next + 1) % kRewardWindow;
          }
          ++episodes_done;
          running_return[ue] = 0.0;
        }
      }

      const std::int64_t before = steps_done;
      steps_done += n_envs;
      for (std::int64_t k = before / options.log_interval + 1; k <= steps_done / options.log_interval; ++k) {
        TrainRecord rec;
        rec.step = k * options.log_interval;
        rec.mean_episode_reward =
            recent_returns.empty()
                ? nan
                : std::accumulate(recent_returns.begin(), recent_returns.end(), 0.0) /
                      static_cast<double>(recent_returns.size());
        rec.episodes = episodes_done;
        rec.surrogate = latest.terms.surrogate;
        rec.value_loss = latest.terms.value_loss;
        rec.entropy = latest.terms.entropy;
        rec.clip_fraction = latest.terms.clip_fraction;
        rec.grad_norm = latest.grad_norm;
        result.curve.push_back(rec);
        if (options.on_record) options.on_record(rec);
      }
    }

    // Bootstrap values for the observation following the last step.
    for (int e = 0; e < n_envs; ++e) {
      for (int a = 0; a < n_agents; ++a) {
        const auto col = static_cast<Eigen::Index>(e * n_agents + a);
        encode_observation(obs[static_cast<std::size_t>(e)][static_cast<std::size_t>(a)], env.domain,
                           std::span<double>(x.col(col).data(), static_cast<std::size_t>(input)));
      }
    }
    const Eigen::VectorXd bootstrap = policy_forward_batch(result.params, x).values;

    batch.advantages.assign(rows, 0.0);
    batch.returns.assign(rows, 0.0);
    std::vector<double> seq_r(static_cast<std::size_t>(horizon));
    std::vector<double> seq_v(static_cast<std::size_t>(horizon) + 1);
    std::vector<std::uint8_t> seq_d(static_cast<std::size_t>(horizon));
    for (int e = 0; e < n_envs; ++e) {
      for (int a = 0; a < n_agents; ++a) {
        const std::size_t col = static_cast<std::size_t>(e * n_agents + a);
        for (int t = 0; t < horizon; ++t) {
          const auto ut = static_cast<std::size_t>(t);
          seq_r[ut] = rewards[ut * static_cast<std::size_t>(n_envs) + static_cast<std::size_t>(e)];
          seq_d[ut] = dones[ut * static_cast<std::size_t>(n_envs) + static_cast<std::size_t>(e)];
          seq_v[ut] = batch.values[ut * slots + col];
        }
        seq_v[static_cast<std::size_t>(horizon)] = bootstrap(static_cast<Eigen::Index>(col));
        const auto adv = gae(seq_r, seq_v, seq_d, ppo.gamma, ppo.lambda);
        for (int t = 0; t < horizon; ++t) {
          const auto row = static_cast<std::size_t>(t) * slots + col;
          batch.advantages[row] = adv[static_cast<std::size_t>(t)];
          batch.returns[row] = adv[static_cast<std::size_t>(t)] + seq_v[static_cast<std::size_t>(t)];
        }
      }
    }

    const UpdateStats stats = ppo_update(result.params, result.adam, batch, ppo, result.rng);
    latest = stats.last();
  }
  return result;
}

std::string curve_to_csv(std::span<const TrainRecord> curve) {
  std::ostringstream os;
  os.precision(10);
  os << "step,mean_ep_reward,episodes,surrogate,value_loss,entropy,clip_fraction,grad_norm\n";
  for (const auto& r : curve) {
    os << r.step << ',' << r.mean_episode_reward << ',' << r.episodes << ',' << r.surrogate << ','
       << r.value_loss << ',' << r.entropy << ',' << r.clip_fraction << ',' << r.grad_norm << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr const char* kCheckpointFormat = "pcg-swarm-checkpoint";
constexpr int kCheckpointVersion = 1;

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["env"] = ckpt.env;
  j["ppo"] = ckpt.ppo;
  j["input_size"] = ckpt.params.input_size();
  j["hidden"] = ckpt.params.hidden();
  j["n_actions"] = ckpt.params.n_actions();
  j["params"] = to_vec(ckpt.params.flat());
  j["adam"] = {{"t", ckpt.adam.t}, {"m", to_vec(ckpt.adam.m)}, {"v", to_vec(ckpt.adam.v)}};
  j["rng"] = {{"seed", ckpt.rng.seed()}, {"counter", ckpt.rng.counter()}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  out << j.dump() << '\n';
  if (!out) throw std::runtime_error("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
    if (j.at("format").get<std::string>() != kCheckpointFormat) {
      throw std::runtime_error("not a pcg-swarm checkpoint");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw std::runtime_error("unsupported checkpoint version " + j.at("version").dump());
    }
    Checkpoint c;
    c.env = j.at("env").get<EnvConfig>();
    c.ppo = j.at("ppo").get<PPOConfig>();
    c.params = PolicyParams(j.at("input_size").get<int>(), j.at("hidden").get<int>(),
                            j.at("n_actions").get<int>());
    const auto flat = j.at("params").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(flat.size()) != c.params.size()) {
      throw std::runtime_error("parameter count does not match the recorded layout");
    }
    c.params.flat() = from_vec(flat);
    c.adam.t = j.at("adam").at("t").get<std::int64_t>();
    c.adam.m = from_vec(j.at("adam").at("m").get<std::vector<double>>());
    c.adam.v = from_vec(j.at("adam").at("v").get<std::vector<double>>());
    c.rng = RngStream(j.at("rng").at("seed").get<std::uint64_t>(),
                      j.at("rng").at("counter").get<std::uint64_t>());
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed checkpoint '" + path + "': " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error("malformed checkpoint '" + path + "': " + e.what());
  }
}

}  // namespace pcgswarm
