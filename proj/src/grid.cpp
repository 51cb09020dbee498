#include "pcgswarm/grid.hpp"

#include <algorithm>
#include <string>

namespace pcgswarm {

std::string_view to_string(Domain d) {
  switch (d) {
    case Domain::Binary: return "binary";
    case Domain::Dungeon: return "dungeon";
  }
  return "unknown";
}

Domain parse_domain(std::string_view name) {
  if (name == "binary") return Domain::Binary;
  if (name == "dungeon") return Domain::Dungeon;
  throw std::invalid_argument("unknown domain '" + std::string(name) + "'");
}

char tile_char(Tile t) {
  switch (t) {
    case Tile::Air: return '.';
    case Tile::Wall: return '#';
    case Tile::Player: return 'P';
    case Tile::Key: return 'K';
    case Tile::Door: return 'D';
    case Tile::Enemy: return 'E';
    case Tile::Border: return '+';
  }
  return '?';
}

Tile tile_from_char(char c) {
  switch (c) {
    case '.': return Tile::Air;
    case '#': return Tile::Wall;
    case 'P': return Tile::Player;
    case 'K': return Tile::Key;
    case 'D': return Tile::Door;
    case 'E': return Tile::Enemy;
    case '+': return Tile::Border;
    default: break;
  }
  throw std::invalid_argument(std::string("unknown tile character '") + c + "'");
}

TileSet TileSet::for_domain(Domain d) {
  if (d == Domain::Binary) return TileSet(d, {Tile::Air, Tile::Wall});
  return TileSet(d, {Tile::Air, Tile::Wall, Tile::Player, Tile::Key, Tile::Door, Tile::Enemy});
}

bool TileSet::contains(Tile t) const {
  return std::find(tiles_.begin(), tiles_.end(), t) != tiles_.end();
}

void MapShape::validate(int min_dim) const {
  if (max_width < min_dim) {
    throw std::invalid_argument("map max_width " + std::to_string(max_width) +
                                " is below the minimum " + std::to_string(min_dim));
  }
  if (height < min_dim || width < min_dim || height > max_width || width > max_width) {
    throw std::invalid_argument("map shape " + std::to_string(height) + "x" +
                                std::to_string(width) + " outside [" +
                                std::to_string(min_dim) + ", " + std::to_string(max_width) + "]");
  }
}

Grid::Grid(int height, int width, Domain domain, Tile fill)
    : height_(height), width_(width), domain_(domain) {
  if (height <= 0 || width <= 0) {
    throw std::invalid_argument("grid dimensions must be positive");
  }
  if (!TileSet::for_domain(domain).contains(fill)) {
    throw std::invalid_argument("fill tile not valid for domain");
  }
  cells_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill);
}

Grid Grid::from_ascii(std::span<const std::string_view> rows, Domain domain) {
  if (rows.empty()) throw std::invalid_argument("empty ascii grid");
  const auto width = static_cast<int>(rows.front().size());
  Grid g(static_cast<int>(rows.size()), width, domain);
  for (int r = 0; r < g.height(); ++r) {
    const auto& line = rows[static_cast<std::size_t>(r)];
    if (static_cast<int>(line.size()) != width) {
      throw std::invalid_argument("ragged ascii grid at row " + std::to_string(r));
    }
    for (int c = 0; c < width; ++c) g.set(r, c, tile_from_char(line[static_cast<std::size_t>(c)]));
  }
  return g;
}

Tile Grid::at(int row, int col) const {
  if (!in_bounds(row, col)) {
    throw std::out_of_range("cell (" + std::to_string(row) + ", " + std::to_string(col) +
                            ") outside " + std::to_string(height_) + "x" +
                            std::to_string(width_) + " grid");
  }
  return cells_[static_cast<std::size_t>(index(row, col))];
}

void Grid::set(int row, int col, Tile t) {
  if (!in_bounds(row, col)) {
    throw std::out_of_range("cell (" + std::to_string(row) + ", " + std::to_string(col) +
                            ") outside " + std::to_string(height_) + "x" +
                            std::to_string(width_) + " grid");
  }
  if (!TileSet::for_domain(domain_).contains(t)) {
    throw std::invalid_argument("tile code " + std::to_string(static_cast<int>(t)) +
                                " not valid for " + std::string(to_string(domain_)));
  }
  cells_[static_cast<std::size_t>(index(row, col))] = t;
}

int Grid::count(Tile t) const {
  return static_cast<int>(std::count(cells_.begin(), cells_.end(), t));
}

std::uint64_t Grid::hash() const {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto feed = [&h](std::uint64_t byte) {
    h ^= byte;
    h *= 0x100000001B3ULL;
  };
  for (int shift = 0; shift < 32; shift += 8) feed((static_cast<std::uint32_t>(height_) >> shift) & 0xFF);
  for (int shift = 0; shift < 32; shift += 8) feed((static_cast<std::uint32_t>(width_) >> shift) & 0xFF);
  feed(static_cast<std::uint64_t>(domain_));
  for (Tile t : cells_) feed(static_cast<std::uint64_t>(t));
  return h;
}

std::string Grid::to_ascii() const {
  std::string out;
  out.reserve(static_cast<std::size_t>((width_ + 1) * height_));
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) out.push_back(tile_char((*this)[index(r, c)]));
    out.push_back('\n');
  }
  return out;
}

Grid set_tile(const Grid& grid, int row, int col, Tile t) {
  Grid out = grid;
  out.set(row, col, t);
  return out;
}

Grid init_random_grid(const MapShape& shape, const TileSet& tileset, RngStream& rng,
                      const InitOptions& opts) {
  if (shape.height < opts.min_dim || shape.width < opts.min_dim) {
    throw std::invalid_argument("map shape " + std::to_string(shape.height) + "x" +
                                std::to_string(shape.width) + " below minimum dimension " +
                                std::to_string(opts.min_dim));
  }
  if (opts.wall_fraction < 0.0 || opts.wall_fraction > 1.0) {
    throw std::invalid_argument("wall_fraction must lie in [0, 1]");
  }
  Grid g(shape.height, shape.width, tileset.domain());
  for (int i = 0; i < g.size(); ++i) {
    g.put(i, rng.bernoulli(opts.wall_fraction) ? Tile::Wall : Tile::Air);
  }
  return g;
}

MapShape sample_map_shape(int max_width, bool randomize, RngStream& rng) {
  if (max_width < kMinMapDim) {
    throw std::invalid_argument("max_width " + std::to_string(max_width) + " is below " +
                                std::to_string(kMinMapDim));
  }
  if (!randomize) return {max_width, max_width, max_width};
  const auto h = static_cast<int>(rng.uniform_int(kMinMapDim, max_width));
  const auto w = static_cast<int>(rng.uniform_int(kMinMapDim, max_width));
  return {h, w, max_width};
}

}  // namespace pcgswarm
