#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "crowdtrack/core/trajectory.hpp"

namespace crowdtrack {

struct MatchConfig {
  double match_radius = 1.0;      // association gate [m]
  double success_threshold = 0.8; // per-track mean error bound [m], strict
  bool use_hungarian = false;     // optimal per-frame assignment instead of greedy

  // Throws std::invalid_argument unless both scales are positive.
  void validate() const;
};

struct MotScore {
  double mota = 1.0;  // 1 - (misses + false_positives + id_switches) / total_gt
  double motp = 0.0;  // mean matched distance [m]; 0 when nothing matched
  int64_t misses = 0;
  int64_t false_positives = 0;
  int64_t id_switches = 0;
  int64_t matches = 0;
  int64_t total_gt_objects = 0;  // ground-truth object-frame count
};

// CLEAR MOT over the union of frames: correspondences from the previous frame
// persist while both ends exist within the gate, the remainder is associated
// greedily by distance (or optimally when cfg.use_hungarian), and a kept
// ground-truth identity changing partners counts one switch.
MotScore clear_mot(const TrajectoryDataset& gt, const TrajectoryDataset& est,
                   const MatchConfig& cfg);

struct TrackQuality {
  int64_t successful_tracks = 0;  // gt agents with paired mean error < threshold
  int64_t total_tracks = 0;       // gt agents
  int64_t id_switches = 0;        // from the CLEAR MOT association
  int64_t false_tracks = 0;       // est agent ids absent from gt
  // Per gt agent: mean position error over frames present in both datasets;
  // +inf when no frame pairs exist (never tracked -> unsuccessful).
  std::map<AgentId, double> mean_error;

  double success_rate() const {
    return total_tracks > 0
               ? static_cast<double>(successful_tracks) / static_cast<double>(total_tracks)
               : 0.0;
  }
};

// Tracks pair by agent_id (the tracker preserves identities); success is a
// strict mean-error bound, so exactly threshold is unsuccessful.
TrackQuality success_and_switches(const TrajectoryDataset& gt,
                                  const TrajectoryDataset& est,
                                  const MatchConfig& cfg);

// Root mean squared position error over (frame, agent_id) pairs present in
// both datasets. Throws std::invalid_argument when no pairs overlap.
double rms_error(const TrajectoryDataset& gt, const TrajectoryDataset& est);

struct EvalReport {
  MotScore mot;
  TrackQuality quality;
  double rms = 0.0;
};

EvalReport evaluate(const TrajectoryDataset& gt, const TrajectoryDataset& est,
                    const MatchConfig& cfg = {});

// JSON object with every score field; CSV is a header plus one row so runs
// concatenate into a table.
std::string eval_report_json(const EvalReport& report);
std::string eval_report_csv(const EvalReport& report);

}  // namespace crowdtrack
