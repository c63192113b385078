#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "crowdtrack/core/scenario.hpp"
#include "crowdtrack/core/trajectory.hpp"
#include "crowdtrack/core/types.hpp"
#include "crowdtrack/models/model_params.hpp"

namespace crowdtrack {

enum class TemplateKind : uint8_t {
  Crossing = 0,        // two orthogonal streams meeting mid-arena
  HeadOnCorridor = 1,  // opposing groups between two wall segments
  CircleSwap = 2,      // agents on a circle walking to their antipodes
  RandomGoals = 3,     // uniform placement, uniform goals
};

const char* to_string(TemplateKind kind);
TemplateKind template_kind_from_string(const std::string& name);

enum class DensityClass : uint8_t { Low = 0, Medium = 1, High = 2 };

const char* to_string(DensityClass d);
DensityClass density_class_from_string(const std::string& name);
// Nominal local crowd density [agents/m^2]: low 0.3, medium 1.0, high 2.5.
double density_value(DensityClass d);

struct ScenarioTemplate {
  TemplateKind kind = TemplateKind::Crossing;
  int agent_count = 8;
  DensityClass density = DensityClass::Medium;
  uint64_t rng_seed = 1;

  // When non-empty, placement is skipped: these states and goals are used
  // verbatim (bespoke fixtures). Goals default to 60 s of straight-line
  // extrapolation for agents missing from explicit_goals.
  Snapshot explicit_initial;
  std::map<AgentId, Vec2> explicit_goals;
};

// Record of what produced a ground-truth dataset, for oracle checks.
struct Provenance {
  ModelKind model = ModelKind::Lin;
  ModelParams params;
  uint64_t seed = 0;
};

std::string provenance_to_json(const Provenance& p);
Provenance provenance_from_json(const std::string& text);

struct SynthOutput {
  Scenario scenario;
  TrajectoryDataset ground_truth;  // velocities included
  Provenance provenance;
};

// Place agents per the template, then step `kind` for frames-1 steps (the
// initial snapshot is frame 0). params rows cover agents the template creates
// (ids 0..n-1); missing rows fall back to the mean column. Throws
// std::runtime_error if placement cannot satisfy the pairwise separation
// invariant within 100 attempts, std::invalid_argument on bad arguments.
SynthOutput generate(const ScenarioTemplate& tmpl, ModelKind kind,
                     const ModelParams& params, int frames, double dt = 0.04);

// Measurement corruption: iid Gaussian position noise plus iid record
// dropout, both keyed per (seed, frame, agent) so the result is independent
// of record order. Output is an Observation dataset carrying positions only.
TrajectoryDataset corrupt(const TrajectoryDataset& gt, double observation_sigma,
                          double dropout_prob, uint64_t rng_seed);

// Burst occlusion: every agent disappears for `episodes` stretches of
// U[min_frames, max_frames] consecutive frames, start frames uniform over the
// dataset span. Episodes are keyed per (seed, agent, episode), so the result
// is independent of record order and of other agents. Models inter-person
// occlusion, which hides a target for contiguous stretches rather than
// isolated frames.
TrajectoryDataset occlude_bursts(const TrajectoryDataset& ds, int episodes,
                                 int min_frames, int max_frames, uint64_t rng_seed);

// Heterogeneous per-agent parameter draws for benchmark scenes: body radius
// U[0.2, 0.35], comfort speed the truncated walking-speed normal on [1, 2],
// RVO horizons U[1, 3] and neighbor distance U[5, 15].
ModelParams draw_benchmark_params(ModelKind kind, std::span<const AgentId> ids,
                                  uint64_t seed);

}  // namespace crowdtrack
