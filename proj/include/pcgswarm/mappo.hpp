#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pcgswarm/env.hpp"
#include "pcgswarm/rng.hpp"

namespace pcgswarm {

/// Length of the flattened network input: per cell a one-hot over the
/// domain's tile kinds plus Border, followed by one value per mask channel.
int feature_size(Domain domain, int window, int n_agents);
void encode_observation(const Observation& obs, Domain domain, std::span<double> out);
Eigen::VectorXd encode_observation(const Observation& obs, Domain domain);

/// Shared actor-critic: two tanh MLPs (input -> hidden -> logits / value)
/// stored in one flat vector so optimizers and checks can treat it as a point.
class PolicyParams {
 public:
  using MatMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
  using VecMap = Eigen::Map<Eigen::VectorXd>;
  using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

  PolicyParams() = default;
  PolicyParams(int input_size, int hidden, int n_actions);  // all zeros

  /// Glorot-uniform hidden layers; the logit layer is scaled by 0.01 so the
  /// initial policy is close to uniform.
  static PolicyParams init(int input_size, int hidden, int n_actions, RngStream& rng);

  [[nodiscard]] int input_size() const { return input_; }
  [[nodiscard]] int hidden() const { return hidden_; }
  [[nodiscard]] int n_actions() const { return actions_; }
  [[nodiscard]] Eigen::Index size() const { return flat_.size(); }

  Eigen::VectorXd& flat() { return flat_; }
  [[nodiscard]] const Eigen::VectorXd& flat() const { return flat_; }

  MatMap actor_w1() { return mat(0, hidden_, input_); }
  VecMap actor_b1() { return vec(off_ab1_, hidden_); }
  MatMap actor_w2() { return mat(off_aw2_, actions_, hidden_); }
  VecMap actor_b2() { return vec(off_ab2_, actions_); }
  MatMap critic_w1() { return mat(off_cw1_, hidden_, input_); }
  VecMap critic_b1() { return vec(off_cb1_, hidden_); }
  MatMap critic_w2() { return mat(off_cw2_, 1, hidden_); }
  VecMap critic_b2() { return vec(off_cb2_, 1); }

  [[nodiscard]] ConstMatMap actor_w1() const { return cmat(0, hidden_, input_); }
  [[nodiscard]] ConstVecMap actor_b1() const { return cvec(off_ab1_, hidden_); }
  [[nodiscard]] ConstMatMap actor_w2() const { return cmat(off_aw2_, actions_, hidden_); }
  [[nodiscard]] ConstVecMap actor_b2() const { return cvec(off_ab2_, actions_); }
  [[nodiscard]] ConstMatMap critic_w1() const { return cmat(off_cw1_, hidden_, input_); }
  [[nodiscard]] ConstVecMap critic_b1() const { return cvec(off_cb1_, hidden_); }
  [[nodiscard]] ConstMatMap critic_w2() const { return cmat(off_cw2_, 1, hidden_); }
  [[nodiscard]] ConstVecMap critic_b2() const { return cvec(off_cb2_, 1); }

  /// Name of the parameter block holding flat index i ("actor.w1", ...).
  [[nodiscard]] std::string block_of(Eigen::Index i) const;

  friend bool operator==(const PolicyParams& a, const PolicyParams& b) {
    return a.input_ == b.input_ && a.hidden_ == b.hidden_ && a.actions_ == b.actions_ &&
           a.flat_ == b.flat_;
  }

 private:
  void layout();
  MatMap mat(Eigen::Index off, int r, int c) { return {flat_.data() + off, r, c}; }
  VecMap vec(Eigen::Index off, int n) { return {flat_.data() + off, n}; }
  [[nodiscard]] ConstMatMap cmat(Eigen::Index off, int r, int c) const { return {flat_.data() + off, r, c}; }
  [[nodiscard]] ConstVecMap cvec(Eigen::Index off, int n) const { return {flat_.data() + off, n}; }

  int input_ = 0;
  int hidden_ = 0;
  int actions_ = 0;
  Eigen::Index off_ab1_ = 0, off_aw2_ = 0, off_ab2_ = 0;
  Eigen::Index off_cw1_ = 0, off_cb1_ = 0, off_cw2_ = 0, off_cb2_ = 0;
  Eigen::VectorXd flat_;
};

struct PolicyOutput {
  Eigen::VectorXd probs;
  Eigen::VectorXd log_probs;
  double value = 0.0;
};

/// Throws std::invalid_argument when the feature length does not match.
PolicyOutput policy_forward(const PolicyParams& params, const Eigen::Ref<const Eigen::VectorXd>& features);

/// Column-batched forward pass: features is input_size x B.
struct BatchOutput {
  Eigen::MatrixXd log_probs;  // n_actions x B
  Eigen::VectorXd values;     // B
};
BatchOutput policy_forward_batch(const PolicyParams& params, const Eigen::Ref<const Eigen::MatrixXd>& features);

/// Inverse-CDF draw from a probability vector.
int sample_action(const Eigen::Ref<const Eigen::VectorXd>& probs, RngStream& rng);

struct PPOConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  double clip = 0.2;
  double lr = 3e-4;
  int epochs = 4;
  int minibatches = 4;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;  // <= 0 disables clipping
  int hidden = 128;
  int num_envs = 16;
  int rollout_len = 128;
  std::int64_t total_steps = 1'000'000;
  double adam_eps = 1e-5;

  /// Throws std::invalid_argument naming the offending ppo.* field.
  void validate() const;
  friend bool operator==(const PPOConfig&, const PPOConfig&) = default;
};

/// delta_t = r_t + gamma v_{t+1} (1 - done_t) - v_t,
/// A_t = delta_t + gamma lambda (1 - done_t) A_{t+1}.
/// `values` holds T+1 entries, the last being the bootstrap value.
std::vector<double> gae(std::span<const double> rewards, std::span<const double> values,
                        std::span<const std::uint8_t> dones, double gamma, double lambda);

/// Flattened transitions ready for an update. Observations are kept as raw
/// bytes and encoded per minibatch.
struct Batch {
  Domain domain = Domain::Binary;
  int obs_window = 0;
  int n_agents = 0;
  std::vector<Observation> observations;
  std::vector<int> actions;
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> advantages;
  std::vector<double> returns;

  [[nodiscard]] std::size_t size() const { return actions.size(); }
};

struct ObjectiveTerms {
  double surrogate = 0.0;   // mean clipped surrogate
  double value_loss = 0.0;  // mean squared error against returns
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  [[nodiscard]] double objective(const PPOConfig& c) const {
    return surrogate - c.value_coef * value_loss + c.entropy_coef * entropy;
  }
};

/// Evaluates the PPO objective (to be maximized) on the given transitions
/// with precomputed advantages, and writes its gradient into `grad` when
/// non-null.
ObjectiveTerms ppo_objective(const PolicyParams& params, const Eigen::Ref<const Eigen::MatrixXd>& features,
                             std::span<const int> actions, std::span<const double> old_log_probs,
                             std::span<const double> advantages, std::span<const double> returns,
                             const PPOConfig& config, Eigen::VectorXd* grad);

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t t = 0;
};

struct EpochStats {
  ObjectiveTerms terms;  // averaged over minibatches
  double grad_norm = 0.0;
};

struct UpdateStats {
  std::vector<EpochStats> epochs;
  [[nodiscard]] const EpochStats& last() const { return epochs.back(); }
};

/// Clipped-surrogate update: normalizes advantages over the batch, then runs
/// `epochs` passes of shuffled minibatches with Adam ascent on the objective.
/// Throws std::runtime_error on a non-finite gradient.
UpdateStats ppo_update(PolicyParams& params, AdamState& adam, const Batch& batch,
                       const PPOConfig& config, RngStream& rng);

struct TrainRecord {
  std::int64_t step = 0;
  double mean_episode_reward = 0.0;
  std::int64_t episodes = 0;
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double grad_norm = 0.0;
};

struct TrainOptions {
  std::int64_t log_interval = 10'000;
  int threads = 1;
  std::function<void(const TrainRecord&)> on_record;
};

struct TrainResult {
  PolicyParams params;
  AdamState adam;
  std::vector<TrainRecord> curve;
  RngStream rng;
};

/// Rollout/update loop over ppo.num_envs parallel environments sharing one
/// parameter snapshot per rollout. Emits one curve record every
/// log_interval joint environment steps. Reproducible from `seed`.
TrainResult train(const EnvConfig& env, const PPOConfig& ppo, std::uint64_t seed,
                  const TrainOptions& options = {});

std::string curve_to_csv(std::span<const TrainRecord> curve);

struct Checkpoint {
  EnvConfig env;
  PPOConfig ppo;
  PolicyParams params;
  AdamState adam;
  RngStream rng;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
/// Throws std::runtime_error on I/O or format problems.
Checkpoint load_checkpoint(const std::string& path);

/// Samples one action per agent from a shared parameter snapshot.
std::vector<Action> learned_joint_action(const PolicyParams& params, const EnvState& state,
                                         const EnvConfig& config, RngStream& rng);

}  // namespace pcgswarm
