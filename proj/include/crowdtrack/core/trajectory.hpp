#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "crowdtrack/core/types.hpp"

namespace crowdtrack {

enum class SourceTag { GroundTruth, Observation, Estimate };

struct TrajRecord {
  int64_t frame = 0;
  AgentId agent_id = 0;
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  bool has_velocity = false;
};

// Flat (frame, agent) record list, kept sorted by (frame, agent_id).
// Ground-truth and estimate datasets must be gap-free per agent between entry
// and exit; observation datasets may have per-agent gaps (dropout, occlusion).
struct TrajectoryDataset {
  std::vector<TrajRecord> records;
  double frame_rate = 25.0;
  SourceTag source_tag = SourceTag::Observation;

  void sort_records();
  // Throws std::invalid_argument on duplicate (frame, agent) keys, non-finite
  // values, non-positive frame rate, or (unless gaps are allowed by the
  // source tag) missing frames between an agent's entry and exit.
  void validate() const;

  bool empty() const { return records.empty(); }
  int64_t first_frame() const;
  int64_t last_frame() const;
  std::vector<AgentId> agent_ids() const;

  // Snapshot of one frame; velocity fields are copied when present, else 0.
  Snapshot frame_snapshot(int64_t frame) const;
};

// CSV with header `frame,agent_id,x,y` or `frame,agent_id,x,y,vx,vy`.
// Values are written with max_digits10 precision so write -> read round-trips
// bit-identically.
TrajectoryDataset read_trajectory_csv(const std::string& path);
void write_trajectory_csv(const TrajectoryDataset& ds, const std::string& path);
std::string trajectory_to_csv(const TrajectoryDataset& ds);
TrajectoryDataset trajectory_from_csv(const std::string& text);

struct VelocityField {
  // (frame, agent) -> backward-difference velocity.
  std::map<std::pair<int64_t, AgentId>, Vec2> at;
  // Agents observed in a single frame get zero velocity and a warning entry.
  std::set<AgentId> single_frame_agents;
};

// velocity(i) = (pos(i) - pos(i-1)) * frame_rate over each agent's observed
// frame sequence (gaps use the actual frame gap); the first observed frame
// copies the second frame's velocity.
VelocityField finite_difference_velocities(const TrajectoryDataset& ds);

}  // namespace crowdtrack
