#include "pcgswarm/reward.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "pcgswarm/pathing.hpp"

namespace pcgswarm {
namespace {

constexpr std::array<Metric, 2> kBinaryMetrics = {Metric::Diameter, Metric::Regions};
constexpr std::array<Metric, 7> kDungeonMetrics = {
    Metric::Players,       Metric::Keys,        Metric::Doors,          Metric::Enemies,
    Metric::PathPlayerKey, Metric::PathKeyDoor, Metric::PathPlayerEnemy};

void require_domain(Domain expected, Domain got, const char* what) {
  if (expected != got) {
    throw std::invalid_argument(std::string("metric set mismatch: ") + what + " is for " +
                                std::string(to_string(got)) + ", expected " +
                                std::string(to_string(expected)));
  }
}

}  // namespace

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::Diameter: return "diameter";
    case Metric::Regions: return "n_regions";
    case Metric::Players: return "n_players";
    case Metric::Keys: return "n_keys";
    case Metric::Doors: return "n_doors";
    case Metric::Enemies: return "n_enemies";
    case Metric::PathPlayerKey: return "path_pk";
    case Metric::PathKeyDoor: return "path_kd";
    case Metric::PathPlayerEnemy: return "path_pe";
  }
  return "unknown";
}

std::optional<Metric> parse_metric(std::string_view name) {
  for (std::size_t i = 0; i < kNumMetrics; ++i) {
    const auto m = static_cast<Metric>(i);
    if (metric_name(m) == name) return m;
  }
  return std::nullopt;
}

std::span<const Metric> metric_set(Domain d) {
  if (d == Domain::Binary) return kBinaryMetrics;
  return kDungeonMetrics;
}

void TargetSpec::validate() const {
  for (Metric m : metric_set(domain)) {
    const auto& iv = (*this)[m];
    if (std::isnan(iv.lo) || std::isnan(iv.hi) || iv.lo > iv.hi) {
      throw std::invalid_argument("target interval for " + std::string(metric_name(m)) +
                                  " has lo > hi");
    }
  }
}

RewardWeights RewardWeights::uniform(Domain d, double w) {
  RewardWeights out;
  out.domain = d;
  for (Metric m : metric_set(d)) out[m] = w;
  return out;
}

void RewardWeights::validate() const {
  bool any_positive = false;
  for (Metric m : metric_set(domain)) {
    const double w = (*this)[m];
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("weight for " + std::string(metric_name(m)) +
                                  " must be finite and non-negative");
    }
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) throw std::invalid_argument("at least one reward weight must be positive");
}

MetricsVector compute_metrics(const Grid& grid) {
  MetricsVector m;
  m.domain = grid.domain();
  if (grid.domain() == Domain::Binary) {
    m[Metric::Diameter] = approx_diameter(grid);
    m[Metric::Regions] = connected_regions(grid, TileMask::air_only());
    return m;
  }

  int players = 0, keys = 0, doors = 0, enemies = 0;
  for (Tile t : grid.cells()) {
    players += t == Tile::Player;
    keys += t == Tile::Key;
    doors += t == Tile::Door;
    enemies += t == Tile::Enemy;
  }
  m[Metric::Players] = players;
  m[Metric::Keys] = keys;
  m[Metric::Doors] = doors;
  m[Metric::Enemies] = enemies;

  // Paths only once the level holds exactly one player, key and door.
  if (players == 1 && keys == 1 && doors == 1 && enemies >= 1) {
    m[Metric::PathPlayerKey] = typed_path_length(grid, Tile::Player, Tile::Key);
    m[Metric::PathKeyDoor] = typed_path_length(grid, Tile::Key, Tile::Door);
    m[Metric::PathPlayerEnemy] = typed_path_length(grid, Tile::Player, Tile::Enemy);
  }
  return m;
}

double loss(const MetricsVector& m, const TargetSpec& t, const RewardWeights& w) {
  require_domain(m.domain, t.domain, "target spec");
  require_domain(m.domain, w.domain, "reward weights");
  double total = 0.0;
  for (Metric k : metric_set(m.domain)) {
    const double x = static_cast<double>(m[k].value_or(0));
    total += w[k] * t[k].distance(x);
  }
  return total;
}

double reward(const MetricsVector& prev, const MetricsVector& curr, const TargetSpec& t,
              const RewardWeights& w) {
  return loss(prev, t, w) - loss(curr, t, w);
}

TargetSpec default_targets(Domain d, const MapShape& shape) {
  TargetSpec t;
  t.domain = d;
  const double area = static_cast<double>(shape.height) * static_cast<double>(shape.width);
  if (d == Domain::Binary) {
    t[Metric::Diameter] = {area, kUnbounded};
    t[Metric::Regions] = {1, 1};
    return t;
  }
  t[Metric::Players] = {1, 1};
  t[Metric::Keys] = {1, 1};
  t[Metric::Doors] = {1, 1};
  t[Metric::Enemies] = {2, 5};
  t[Metric::PathPlayerKey] = {area, kUnbounded};
  t[Metric::PathKeyDoor] = {area, kUnbounded};
  t[Metric::PathPlayerEnemy] = {3, kUnbounded};
  return t;
}

}  // namespace pcgswarm
