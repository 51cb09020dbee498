#pragma once

#include "json.hpp"

#include "pcgswarm/env.hpp"
#include "pcgswarm/grid.hpp"
#include "pcgswarm/mappo.hpp"
#include "pcgswarm/reward.hpp"

namespace pcgswarm {

// {"domain": str, "height": int, "width": int, "cells": [[int]]}
void to_json(nlohmann::json& j, const Grid& g);
void from_json(const nlohmann::json& j, Grid& g);

// Intervals serialize as [lo, hi] with null for an unbounded side.
void to_json(nlohmann::json& j, const TargetSpec& t);
TargetSpec targets_from_json(const nlohmann::json& j, Domain domain);
void to_json(nlohmann::json& j, const RewardWeights& w);
RewardWeights weights_from_json(const nlohmann::json& j, Domain domain);

void to_json(nlohmann::json& j, const EnvConfig& c);
void from_json(const nlohmann::json& j, EnvConfig& c);

void to_json(nlohmann::json& j, const PPOConfig& c);
void from_json(const nlohmann::json& j, PPOConfig& c);

void to_json(nlohmann::json& j, const MetricsVector& m);

}  // namespace pcgswarm
