#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowdtrack/calib/calibration.hpp"
#include "crowdtrack/core/scenario.hpp"
#include "crowdtrack/core/trajectory.hpp"
#include "crowdtrack/track/confidence.hpp"
#include "crowdtrack/track/particles.hpp"

namespace crowdtrack {

struct TrackerConfig {
  int window_k = 10;  // replay depth; the rolling window holds k+1 snapshots
  NoiseModel noise;
  ConfidenceConfig confidence;
  CalibrationConfig calibration;
  // When set, every agent steps under this one model (homogeneous baseline)
  // and calibration fits only it.
  std::optional<ModelKind> forced_model;
  bool adaptive = true;  // false: every agent keeps confidence.n_max particles
  uint64_t seed = 1;
  int threads = 1;
  double goal_horizon = 2.0;  // live goals extrapolate this far along velocity
  // One-time position jitter applied to an agent's particles when it drops
  // out of the observations. While unobserved the cloud rolls without process
  // noise (see the propagation note in tracker.cpp), so this onset spread is
  // what keeps alternative positions alive for re-acquisition when the
  // occlusion ends somewhere the prior did not predict.
  double occlusion_onset_sigma = 0.3;
  ModelConstants constants;

  // Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

struct DiagnosticsRow {
  int64_t frame = 0;
  AgentId agent_id = 0;
  ModelKind model = ModelKind::Lin;
  int particles = 0;
  double pr = 0.0;   // propagation reliability
  double mmr = 0.0;  // motion model reliability
  double err = -1.0; // estimate-to-observation distance; -1 when unobserved
};

// Header `frame,agent_id,model,particles,pr,mmr,err`, one row per tracked
// (frame, agent).
std::string diagnostics_to_csv(std::span<const DiagnosticsRow> rows);

struct TrackSummary {
  int64_t frames_total = 0;    // estimate frames emitted (seed window included)
  int64_t frames_tracked = 0;  // frames run through the particle filter
  // Tracked frames per wall second, calibration included, I/O excluded.
  double steps_per_second = 0.0;
  double mean_particles = 0.0;  // over tracked (frame, agent) rows
  std::map<ModelKind, int64_t> model_frequency;  // tracked rows per model
  int64_t lost_track_events = 0;  // reweight underflows (track temporarily lost)
  int64_t calibration_count = 0;
  double calibration_seconds = 0.0;
};

struct WindowCalibration {
  int64_t frame = 0;  // tracked frame whose update used this result
  CalibrationResult result;
};

struct TrackOutput {
  TrajectoryDataset estimates;  // gap-free per agent from first sighting
  std::vector<DiagnosticsRow> diagnostics;
  std::vector<WindowCalibration> calibrations;
  TrackSummary summary;
};

// Run the mixture tracker over an observation sequence. The first window_k
// observation frames seed the state (occluded agents hold their last seen
// position; velocities are least-squares slopes over the seed window), after
// which each frame recalibrates on its cadence, steps every agent's particle
// set through its assigned model, reweights against the observation when one
// exists, and adapts the particle count from the confidence product.
//
// Throws std::invalid_argument for config errors and std::runtime_error for
// data-shape errors (fewer than window_k+1 observation frames, or a frame
// rate that contradicts scenario.dt).
TrackOutput track(const TrajectoryDataset& observations, const Scenario& scenario,
                  const TrackerConfig& config);

}  // namespace crowdtrack
