#include "pcgswarm/pathing.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace pcgswarm {
namespace {

// Fills `dist` (size = grid cells) from `source`; returns the farthest cell,
// smallest index on ties.
int bfs(const Grid& grid, int source, TileMask passable, std::vector<int>& dist,
        std::vector<int>& queue) {
  const int h = grid.height();
  const int w = grid.width();
  dist.assign(static_cast<std::size_t>(grid.size()), kUnreachable);
  queue.resize(static_cast<std::size_t>(grid.size()));

  std::size_t head = 0;
  std::size_t tail = 0;
  dist[static_cast<std::size_t>(source)] = 0;
  queue[tail++] = source;
  int farthest = source;

  while (head < tail) {
    const int cur = queue[head++];
    const int d = dist[static_cast<std::size_t>(cur)];
    if (d > dist[static_cast<std::size_t>(farthest)] ||
        (d == dist[static_cast<std::size_t>(farthest)] && cur < farthest)) {
      farthest = cur;
    }
    const int r = cur / w;
    const int c = cur % w;
    const int nbrs[4] = {r > 0 ? cur - w : -1, r + 1 < h ? cur + w : -1,
                         c + 1 < w ? cur + 1 : -1, c > 0 ? cur - 1 : -1};
    for (int nb : nbrs) {
      if (nb < 0) continue;
      auto& slot = dist[static_cast<std::size_t>(nb)];
      if (slot != kUnreachable || !passable(grid[nb])) continue;
      slot = d + 1;
      queue[tail++] = nb;
    }
  }
  return farthest;
}

}  // namespace

int DistanceField::max_finite() const {
  int best = 0;
  for (int d : dist) best = std::max(best, d);
  return best;
}

DistanceField distance_field(const Grid& grid, Cell source, TileMask passable) {
  if (!grid.in_bounds(source.row, source.col)) {
    throw std::out_of_range("distance_field source outside grid");
  }
  const int src = grid.index(source.row, source.col);
  if (!passable(grid[src])) {
    throw std::invalid_argument("distance_field source (" + std::to_string(source.row) + ", " +
                                std::to_string(source.col) + ") is not passable");
  }
  DistanceField field{grid.height(), grid.width(), {}};
  std::vector<int> queue;
  bfs(grid, src, passable, field.dist, queue);
  return field;
}

int approx_diameter(const Grid& grid) {
  const auto cells = grid.cells();
  const auto first = std::find(cells.begin(), cells.end(), Tile::Air);
  if (first == cells.end()) return 0;

  std::vector<int> dist;
  std::vector<int> queue;
  const auto air = TileMask::air_only();
  const int u = bfs(grid, static_cast<int>(first - cells.begin()), air, dist, queue);
  const int v = bfs(grid, u, air, dist, queue);
  return dist[static_cast<std::size_t>(v)];
}

int connected_regions(const Grid& grid, TileMask passable) {
  std::vector<char> seen(static_cast<std::size_t>(grid.size()), 0);
  std::vector<int> stack;
  const int h = grid.height();
  const int w = grid.width();
  int regions = 0;
  for (int start = 0; start < grid.size(); ++start) {
    if (seen[static_cast<std::size_t>(start)] || !passable(grid[start])) continue;
    ++regions;
    seen[static_cast<std::size_t>(start)] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      const int r = cur / w;
      const int c = cur % w;
      const int nbrs[4] = {r > 0 ? cur - w : -1, r + 1 < h ? cur + w : -1,
                           c + 1 < w ? cur + 1 : -1, c > 0 ? cur - 1 : -1};
      for (int nb : nbrs) {
        if (nb < 0 || seen[static_cast<std::size_t>(nb)] || !passable(grid[nb])) continue;
        seen[static_cast<std::size_t>(nb)] = 1;
        stack.push_back(nb);
      }
    }
  }
  return regions;
}

std::optional<int> typed_path_length(const Grid& grid, Tile from, Tile to) {
  const auto cells = grid.cells();
  const auto src = std::find(cells.begin(), cells.end(), from);
  if (src == cells.end()) {
    throw std::invalid_argument("typed_path_length: grid has no '" +
                                std::string(1, tile_char(from)) + "' tile");
  }
  std::vector<int> dist;
  std::vector<int> queue;
  bfs(grid, static_cast<int>(src - cells.begin()), TileMask::non_wall(), dist, queue);

  std::optional<int> best;
  for (int i = 0; i < grid.size(); ++i) {
    if (grid[i] != to || dist[static_cast<std::size_t>(i)] == kUnreachable) continue;
    if (from == to && dist[static_cast<std::size_t>(i)] == 0) continue;
    if (!best || dist[static_cast<std::size_t>(i)] < *best) best = dist[static_cast<std::size_t>(i)];
  }
  return best;
}

}  // namespace pcgswarm
