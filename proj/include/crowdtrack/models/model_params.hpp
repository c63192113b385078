#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "crowdtrack/core/types.hpp"

namespace crowdtrack {

// Enumerator order is also the selection tie-break order: when two models
// explain a window equally well the cheaper (earlier) one wins.
enum class ModelKind : uint8_t { Lin = 0, Boids = 1, SocialForces = 2, Rvo = 3 };

inline constexpr std::array<ModelKind, 4> kAllModels{
    ModelKind::Lin, ModelKind::Boids, ModelKind::SocialForces, ModelKind::Rvo};

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// One optimizable parameter: box range plus the value used for the seed
// individual. speed_prior marks the comfort-speed dimension, whose base
// distribution is a truncated normal around typical walking speed instead of
// uniform over the range.
struct ParamDef {
  const char* name;
  double lo;
  double hi;
  double mean;
  bool speed_prior;
};

std::span<const ParamDef> param_defs(ModelKind kind);
inline size_t param_count(ModelKind kind) { return param_defs(kind).size(); }

// Typical pedestrian walking speed; the base distribution for every
// comfort-speed dimension is a normal with these moments truncated to range.
inline constexpr double kWalkSpeedMean = 1.4;  // [m/s]
inline constexpr double kWalkSpeedSd = 0.3;    // [m/s]

inline constexpr size_t kMaxParamsPerAgent = 5;
using ParamRecord = std::array<double, kMaxParamsPerAgent>;

// Column indices into ParamRecord per model.
namespace pix {
inline constexpr size_t kBoidsRadius = 0, kBoidsComfort = 1;
inline constexpr size_t kSfRadius = 0, kSfComfort = 1;
inline constexpr size_t kRvoComfort = 0, kRvoNeighborDist = 1, kRvoRadius = 2,
                        kRvoAgentHorizon = 3, kRvoObstacleHorizon = 4;
}  // namespace pix

inline double comfort_speed(ModelKind kind, const ParamRecord& r) {
  return kind == ModelKind::Rvo ? r[pix::kRvoComfort] : r[pix::kBoidsComfort];
}
inline double body_radius(ModelKind kind, const ParamRecord& r) {
  return kind == ModelKind::Rvo ? r[pix::kRvoRadius] : r[pix::kBoidsRadius];
}

// Per-agent parameter table for one model. LIN has no parameters; its
// per_agent map may be empty regardless of the crowd.
struct ModelParams {
  ModelKind kind = ModelKind::Lin;
  std::map<AgentId, ParamRecord> per_agent;

  // Throws std::invalid_argument naming the offending agent and parameter if
  // a value is outside its range, or if a required agent is missing.
  void validate(std::span<const AgentId> agents) const;

  static ModelParams means_for(ModelKind kind, std::span<const AgentId> agents);
};

// Fixed constants shared by the models (not subject to calibration).
struct ModelConstants {
  double tau = 0.5;                 // velocity relaxation time [s]
  double v_cap = kDefaultVCap;      // hard speed ceiling [m/s]

  double sf_repulsion_a = 2.0;      // social repulsion strength [m/s^2]
  double sf_repulsion_b = 0.3;      // social repulsion falloff [m]
  double sf_contact_k = 40.0;       // contact spring [1/s^2]
  double sf_cutoff = 3.0;           // neighbor cutoff [m]
  double sf_force_cap = 10.0;       // per-term cap [m/s^2]

  double boids_w_separation = 2.0;
  double boids_w_alignment = 0.5;
  double boids_w_cohesion = 0.5;
  double boids_w_goal = 1.0;
  double boids_neighborhood = 5.0;  // [m]
  double boids_lookahead = 1.0;     // separation prediction horizon [s]

  int rvo_max_neighbors = 10;
};

}  // namespace crowdtrack
