#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "crowdtrack/core/vec2.hpp"

namespace crowdtrack {

// Uniform hash grid for radius queries; average O(1) per query at crowd
// densities. Query results come back ordered by (cell row, cell col,
// insertion index), which is deterministic for a fixed input order.
class NeighborGrid {
 public:
  explicit NeighborGrid(double cell_size) : cell_(cell_size) {}

  void build(std::span<const Vec2> positions) {
    cells_.clear();
    positions_ = positions;
    for (size_t i = 0; i < positions.size(); ++i) {
      cells_[key(cell_of(positions[i]))].push_back(static_cast<int>(i));
    }
  }

  // Appends indices with |p_i - center| <= radius, excluding `exclude`.
  void query(Vec2 center, double radius, int exclude, std::vector<int>& out) const {
    const double r2 = radius * radius;
    const auto [cx0, cy0] = cell_of({center.x - radius, center.y - radius});
    const auto [cx1, cy1] = cell_of({center.x + radius, center.y + radius});
    for (int64_t cy = cy0; cy <= cy1; ++cy) {
      for (int64_t cx = cx0; cx <= cx1; ++cx) {
        auto it = cells_.find(key({cx, cy}));
        if (it == cells_.end()) continue;
        for (int i : it->second) {
          if (i == exclude) continue;
          if (norm_sq(positions_[i] - center) <= r2) out.push_back(i);
        }
      }
    }
  }

 private:
  std::pair<int64_t, int64_t> cell_of(Vec2 p) const {
    return {static_cast<int64_t>(std::floor(p.x / cell_)),
            static_cast<int64_t>(std::floor(p.y / cell_))};
  }
  static uint64_t key(std::pair<int64_t, int64_t> c) {
    return (static_cast<uint64_t>(c.first) << 32) ^
           (static_cast<uint64_t>(c.second) & 0xffffffffull);
  }

  double cell_;
  std::span<const Vec2> positions_;
  std::unordered_map<uint64_t, std::vector<int>> cells_;
};

}  // namespace crowdtrack
