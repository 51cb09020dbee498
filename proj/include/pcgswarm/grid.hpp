#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pcgswarm/rng.hpp"

namespace pcgswarm {

// Integer codes are frozen; traces, checkpoints and JSON grids depend on them.
enum class Tile : std::uint8_t {
  Air = 0,
  Wall = 1,
  Player = 2,
  Key = 3,
  Door = 4,
  Enemy = 5,
  Border = 255,  // observation padding only, never stored in a Grid
};

inline constexpr int kNumTileKinds = 6;

enum class Domain : std::uint8_t { Binary, Dungeon };

std::string_view to_string(Domain d);
Domain parse_domain(std::string_view name);

char tile_char(Tile t);
Tile tile_from_char(char c);

/// Ordered tile kinds that a domain may store.
class TileSet {
 public:
  static TileSet for_domain(Domain d);

  [[nodiscard]] Domain domain() const { return domain_; }
  [[nodiscard]] std::span<const Tile> tiles() const { return tiles_; }
  [[nodiscard]] int size() const { return static_cast<int>(tiles_.size()); }
  [[nodiscard]] bool contains(Tile t) const;

 private:
  TileSet(Domain d, std::vector<Tile> tiles) : domain_(d), tiles_(std::move(tiles)) {}
  Domain domain_;
  std::vector<Tile> tiles_;
};

inline constexpr int kMinMapDim = 3;

struct MapShape {
  int height = 0;
  int width = 0;
  int max_width = 0;

  [[nodiscard]] int cells() const { return height * width; }
  /// Throws std::invalid_argument unless min_dim <= height, width <= max_width.
  void validate(int min_dim = kMinMapDim) const;

  friend bool operator==(const MapShape&, const MapShape&) = default;
};

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Row-major tile array.
///
/// `at` and `set` throw std::out_of_range for bad coordinates and
/// std::invalid_argument for a tile the domain cannot store.
class Grid {
 public:
  Grid() = default;
  Grid(int height, int width, Domain domain, Tile fill = Tile::Air);

  /// Parses rows of the ASCII charset ('.', '#', 'P', 'K', 'D', 'E').
  static Grid from_ascii(std::span<const std::string_view> rows, Domain domain);
  static Grid from_ascii(std::initializer_list<std::string_view> rows, Domain domain) {
    return from_ascii(std::span<const std::string_view>(rows.begin(), rows.size()), domain);
  }

  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int size() const { return height_ * width_; }
  [[nodiscard]] Domain domain() const { return domain_; }

  [[nodiscard]] bool in_bounds(int row, int col) const {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }
  [[nodiscard]] int index(int row, int col) const { return row * width_ + col; }

  [[nodiscard]] Tile at(int row, int col) const;
  void set(int row, int col, Tile t);

  // Unchecked access for hot loops.
  [[nodiscard]] Tile operator[](int idx) const { return cells_[static_cast<std::size_t>(idx)]; }
  void put(int idx, Tile t) { cells_[static_cast<std::size_t>(idx)] = t; }

  [[nodiscard]] std::span<const Tile> cells() const { return cells_; }
  [[nodiscard]] int count(Tile t) const;

  /// FNV-1a over dimensions, domain and cells.
  [[nodiscard]] std::uint64_t hash() const;

  [[nodiscard]] std::string to_ascii() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  Domain domain_ = Domain::Binary;
  std::vector<Tile> cells_;
};

/// Functional single-cell update.
Grid set_tile(const Grid& grid, int row, int col, Tile t);
inline Tile get_tile(const Grid& grid, int row, int col) { return grid.at(row, col); }

struct InitOptions {
  double wall_fraction = 0.5;
  int min_dim = kMinMapDim;  // tests lower this to build degenerate maps
};

/// Every cell independently Wall with probability wall_fraction, else Air.
/// Dungeon special tiles are never placed here.
Grid init_random_grid(const MapShape& shape, const TileSet& tileset, RngStream& rng,
                      const InitOptions& opts = {});

/// randomize=false gives (max_width, max_width); otherwise each side is
/// uniform over [kMinMapDim, max_width].
MapShape sample_map_shape(int max_width, bool randomize, RngStream& rng);

}  // namespace pcgswarm
