#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "pcgswarm/agents.hpp"
#include "pcgswarm/mappo.hpp"

namespace pcgswarm {

/// Either a scripted baseline or a shared learned actor. All agents of a
/// joint action are decided from the same state and parameter snapshot.
class JointPolicy {
 public:
  static JointPolicy scripted(PolicyTag tag) { return JointPolicy(tag); }
  static JointPolicy learned(PolicyParams params, EnvConfig trained_on);

  std::vector<Action> act(const EnvState& state, const EnvConfig& config, RngStream& rng) const;

  /// Throws std::invalid_argument when `config` produces observations or
  /// actions the policy cannot consume.
  void check_compatible(const EnvConfig& config) const;

  [[nodiscard]] std::string name() const;
  [[nodiscard]] bool is_learned() const { return std::holds_alternative<Learned>(impl_); }

 private:
  struct Learned {
    std::shared_ptr<const PolicyParams> params;
    EnvConfig trained_on;
  };
  explicit JointPolicy(PolicyTag tag) : impl_(tag) {}
  explicit JointPolicy(Learned l) : impl_(std::move(l)) {}

  std::variant<PolicyTag, Learned> impl_;
};

}  // namespace pcgswarm
