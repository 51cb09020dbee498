#include "pcgswarm/policy.hpp"

#include <stdexcept>

namespace pcgswarm {

JointPolicy JointPolicy::learned(PolicyParams params, EnvConfig trained_on) {
  return JointPolicy(Learned{std::make_shared<const PolicyParams>(std::move(params)), std::move(trained_on)});
}

std::vector<Action> JointPolicy::act(const EnvState& state, const EnvConfig& config, RngStream& rng) const {
  if (const auto* tag = std::get_if<PolicyTag>(&impl_)) return scripted_joint_action(*tag, state, rng);
  return learned_joint_action(*std::get<Learned>(impl_).params, state, config, rng);
}

void JointPolicy::check_compatible(const EnvConfig& config) const {
  const auto* l = std::get_if<Learned>(&impl_);
  if (!l) return;
  const auto& p = *l->params;
  if (config.domain != l->trained_on.domain) {
    throw std::invalid_argument("checkpoint was trained on the " +
                                std::string(to_string(l->trained_on.domain)) + " domain, not " +
                                std::string(to_string(config.domain)));
  }
  const int features = feature_size(config.domain, config.window(), config.n_agents);
  if (features != p.input_size()) {
    throw std::invalid_argument(
        "observation shape mismatch: window " + std::to_string(config.window()) + " with " +
        std::to_string(config.n_agents) + " agents gives " + std::to_string(features) +
        " features, checkpoint expects " + std::to_string(p.input_size()) + " (trained with window " +
        std::to_string(l->trained_on.window()) + ", " + std::to_string(l->trained_on.n_agents) + " agents)");
  }
  if (action_count(config.domain) != p.n_actions()) {
    throw std::invalid_argument("action count mismatch: checkpoint has " + std::to_string(p.n_actions()));
  }
}

std::string JointPolicy::name() const {
  if (const auto* tag = std::get_if<PolicyTag>(&impl_)) return std::string(to_string(*tag));
  return "checkpoint";
}

}  // namespace pcgswarm
