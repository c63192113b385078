#pragma once

#include <cstdint>
#include <map>

#include "crowdtrack/core/vec2.hpp"

namespace crowdtrack {

using AgentId = int32_t;

// Hard physical speed ceiling used for sanity clamps and confidence scoring;
// individual models cap at their own comfort speeds well below this.
inline constexpr double kDefaultVCap = 5.0;

struct AgentState {
  Vec2 pos;
  Vec2 vel;

  bool finite() const { return is_finite(pos) && is_finite(vel); }
};

// One time slice. Key presence doubles as the entry/exit flag: an agent absent
// from the map is not in the scene (or occluded) at that frame. std::map keeps
// iteration order deterministic.
using Snapshot = std::map<AgentId, AgentState>;

}  // namespace crowdtrack
