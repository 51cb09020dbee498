#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pcgswarm/grid.hpp"

namespace pcgswarm {

inline constexpr int kUnreachable = -1;

/// Set of tile kinds treated as traversable.
class TileMask {
 public:
  constexpr TileMask() = default;
  constexpr TileMask(std::initializer_list<Tile> tiles) {
    for (Tile t : tiles) bits_ |= bit(t);
  }

  static constexpr TileMask air_only() { return {Tile::Air}; }
  /// Everything except Wall: dungeon entities stand on walkable floor.
  static constexpr TileMask non_wall() {
    return {Tile::Air, Tile::Player, Tile::Key, Tile::Door, Tile::Enemy};
  }

  [[nodiscard]] constexpr bool operator()(Tile t) const { return (bits_ & bit(t)) != 0; }

 private:
  static constexpr std::uint8_t bit(Tile t) {
    const auto code = static_cast<unsigned>(t);
    return code < 8 ? static_cast<std::uint8_t>(1U << code) : 0;
  }
  std::uint8_t bits_ = 0;
};

/// Edge-step distances from one source, kUnreachable elsewhere.
struct DistanceField {
  int height = 0;
  int width = 0;
  std::vector<int> dist;

  [[nodiscard]] int at(int row, int col) const {
    return dist[static_cast<std::size_t>(row * width + col)];
  }
  [[nodiscard]] int max_finite() const;
};

/// 4-connected BFS over cells accepted by `passable`.
/// Throws std::invalid_argument if the source cell is not passable.
DistanceField distance_field(const Grid& grid, Cell source, TileMask passable);

/// Two-sweep BFS estimate of the longest shortest path between Air cells.
/// Starts from the first Air cell in row-major order; ties for the farthest
/// cell go to the smallest row-major index. Returns 0 without Air cells.
int approx_diameter(const Grid& grid);

/// Number of maximal 4-connected components of passable cells.
int connected_regions(const Grid& grid, TileMask passable);

/// Shortest path (edges) from the first `from` cell to the nearest `to` cell,
/// walking on everything but Wall. nullopt when no `to` cell is reachable.
/// Throws std::invalid_argument if the grid holds no `from` cell.
std::optional<int> typed_path_length(const Grid& grid, Tile from, Tile to);

}  // namespace pcgswarm
