#pragma once

#include <algorithm>
#include <array>
#include <limits>
#include <optional>
#include <span>
#include <string_view>

#include "pcgswarm/grid.hpp"

namespace pcgswarm {

enum class Metric : std::uint8_t {
  Diameter,
  Regions,
  Players,
  Keys,
  Doors,
  Enemies,
  PathPlayerKey,
  PathKeyDoor,
  PathPlayerEnemy,
};

inline constexpr std::size_t kNumMetrics = 9;

std::string_view metric_name(Metric m);
std::optional<Metric> parse_metric(std::string_view name);

/// Metrics scored in a domain, in canonical order.
std::span<const Metric> metric_set(Domain d);

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = 0.0;
  double hi = kUnbounded;

  [[nodiscard]] double distance(double x) const {
    return std::max(lo - x, 0.0) + std::max(x - hi, 0.0);
  }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Heuristic values for one grid. Entries outside the domain's metric set
/// are unused; unset dungeon paths are nullopt.
struct MetricsVector {
  Domain domain = Domain::Binary;
  std::array<std::optional<int>, kNumMetrics> values{};

  [[nodiscard]] std::optional<int> operator[](Metric m) const {
    return values[static_cast<std::size_t>(m)];
  }
  std::optional<int>& operator[](Metric m) { return values[static_cast<std::size_t>(m)]; }

  friend bool operator==(const MetricsVector&, const MetricsVector&) = default;
};

struct TargetSpec {
  Domain domain = Domain::Binary;
  std::array<Interval, kNumMetrics> intervals{};

  [[nodiscard]] const Interval& operator[](Metric m) const {
    return intervals[static_cast<std::size_t>(m)];
  }
  Interval& operator[](Metric m) { return intervals[static_cast<std::size_t>(m)]; }

  /// Throws std::invalid_argument if any interval in the metric set has lo > hi.
  void validate() const;

  friend bool operator==(const TargetSpec&, const TargetSpec&) = default;
};

struct RewardWeights {
  Domain domain = Domain::Binary;
  std::array<double, kNumMetrics> weights{};

  /// 1.0 on every metric of the domain.
  static RewardWeights uniform(Domain d, double w = 1.0);

  [[nodiscard]] double operator[](Metric m) const { return weights[static_cast<std::size_t>(m)]; }
  double& operator[](Metric m) { return weights[static_cast<std::size_t>(m)]; }

  /// Non-negative, finite, and at least one strictly positive.
  void validate() const;

  friend bool operator==(const RewardWeights&, const RewardWeights&) = default;
};

MetricsVector compute_metrics(const Grid& grid);

/// Weighted sum of distances from each metric to its target interval.
/// Unset path metrics count as value 0.
/// Throws std::invalid_argument when the three inputs disagree on domain.
double loss(const MetricsVector& m, const TargetSpec& t, const RewardWeights& w);

/// loss(prev) - loss(curr): positive when the edits moved toward the targets.
double reward(const MetricsVector& prev, const MetricsVector& curr, const TargetSpec& t,
              const RewardWeights& w);

TargetSpec default_targets(Domain d, const MapShape& shape);

}  // namespace pcgswarm
