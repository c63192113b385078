#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crowdtrack/calib/optimizers.hpp"
#include "crowdtrack/eval/metrics.hpp"
#include "crowdtrack/synth/synthesis.hpp"
#include "crowdtrack/track/tracker.hpp"

namespace crowdtrack {

// Seeded generate -> corrupt -> track -> score pipeline shared by the compare
// command and the acceptance gate, so both talk about the same benchmark.

struct TrackingSuiteConfig {
  int cases = 10;
  uint64_t base_seed = 1;
  int agents = 50;
  TemplateKind tmpl = TemplateKind::Crossing;
  DensityClass density = DensityClass::Medium;
  ModelKind generator = ModelKind::Rvo;
  int frames = 320;
  double dt = 0.04;
  double observation_sigma = 0.1;
  double dropout = 0.1;
  // Burst occlusion (inter-person occlusion analog) on top of iid dropout:
  // every agent disappears once for 70-100 consecutive frames. Long blind
  // stretches are where the motion prior carries the track.
  int occlusion_episodes = 1;
  int occlusion_min_frames = 70;
  int occlusion_max_frames = 100;
};

// Tracker configuration the tracking benchmark runs under; the tuned values
// are part of the benchmark definition (both the mixture and the forced-LIN
// baseline share them, so comparisons stay paired).
TrackerConfig benchmark_tracker_config();

struct SuiteCase {
  uint64_t seed = 0;
  SynthOutput truth;
  TrajectoryDataset observations;
};

SuiteCase make_suite_case(const TrackingSuiteConfig& cfg, int index);

struct TrackedRun {
  uint64_t seed = 0;
  EvalReport report;
  TrackSummary summary;
  double tracking_seconds = 0.0;
};

TrackedRun run_tracking_case(const SuiteCase& c, const TrackerConfig& tracker,
                             const MatchConfig& match = {});

// --- Optimizer benchmark: the three search methods on identical calibration
// tasks (self-generated uncorrupted windows) at equal evaluation budgets.

struct OptimizerBenchConfig {
  int seeds = 10;
  uint64_t base_seed = 1;
  std::vector<ModelKind> kinds{ModelKind::Boids, ModelKind::Rvo};
  int agents = 10;
  int window_steps = 10;  // the window holds this many steps (k+1 frames)
  int64_t budget = 600;   // cost evaluations per task, binding for all methods
  double dt = 0.04;
};

struct OptimizerBenchStat {
  OptimMethod method = OptimMethod::Greedy;
  std::vector<double> errors;  // final replay error per task (seed x kind)
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  double median = 0.0;
};

std::vector<OptimizerBenchStat> run_optimizer_bench(const OptimizerBenchConfig& cfg);

// Range-and-mean table (one row per method) and its CSV twin.
std::string optimizer_bench_table(std::span<const OptimizerBenchStat> stats);
std::string optimizer_bench_csv(std::span<const OptimizerBenchStat> stats);

double median_of(std::vector<double> values);  // throws on empty input

}  // namespace crowdtrack
