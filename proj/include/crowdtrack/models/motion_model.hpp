#pragma once

#include <map>
#include <memory>
#include <span>
#include <vector>

#include "crowdtrack/core/grid.hpp"
#include "crowdtrack/core/scenario.hpp"
#include "crowdtrack/core/types.hpp"
#include "crowdtrack/models/model_params.hpp"
#include "crowdtrack/models/orca.hpp"

namespace crowdtrack {

// Dense, index-aligned crowd state: the hot path for replay and tracking.
struct CrowdState {
  std::vector<AgentId> ids;  // ascending
  std::vector<AgentState> st;

  size_t size() const { return ids.size(); }
  static CrowdState from_snapshot(const Snapshot& snap);
  Snapshot to_snapshot() const;
  // -1 when absent.
  int index_of(AgentId id) const;
};

// Parameters aligned with a CrowdState's id order.
struct DenseParams {
  ModelKind kind = ModelKind::Lin;
  std::vector<ParamRecord> rows;

  // Validates ranges; throws naming the offending agent/parameter.
  static DenseParams from(const ModelParams& params, std::span<const AgentId> ids);
};

struct NeighborView {
  Vec2 pos;
  Vec2 vel;
  double radius;
};

// Scratch buffers reused across steps to keep replay allocation-free. For
// crowds past a size threshold prepare() builds a uniform grid that neighbor
// collection then queries; small crowds scan directly.
struct StepWorkspace {
  std::vector<Vec2> positions;
  std::vector<int> candidates;
  std::vector<std::pair<double, int>> ranked;
  std::vector<NeighborView> neighbors;
  std::vector<OrcaLine> lines;
  std::unique_ptr<NeighborGrid> grid;
  const CrowdState* grid_crowd = nullptr;

  void prepare(const CrowdState& crowd);
};

// v_pref: comfort-speed pursuit of the goal, with exact arrival inside one
// step so agents settle on their goals instead of orbiting them.
Vec2 preferred_velocity(Vec2 pos, Vec2 goal, double comfort, double dt);

// One agent, one step, neighbors frozen. All models integrate
// semi-implicitly (v' first, then p += v' * dt) so backward position
// differences reproduce stored velocities exactly.
AgentState step_one(ModelKind kind, const AgentState& self,
                    std::span<const NeighborView> neighbors, Vec2 goal,
                    const ParamRecord& params, const Scenario& scenario,
                    const ModelConstants& constants, double dt,
                    bool* rvo_feasible = nullptr,
                    std::vector<OrcaLine>* line_scratch = nullptr);

// Deterministic neighbor list for agent i under `kind`: radius is the model's
// neighborhood (Boids: fixed, SF: cutoff, RVO: per-agent neighbor distance,
// capped to the nearest rvo_max_neighbors by (distance, id)).
void collect_neighbors(ModelKind kind, const CrowdState& crowd, const DenseParams& dp,
                       const ModelConstants& constants, size_t i, StepWorkspace& ws,
                       std::vector<NeighborView>& out);

// Advance the whole crowd one step. goals must be aligned with crowd.ids.
void step_crowd(ModelKind kind, const CrowdState& in, std::span<const Vec2> goals,
                const DenseParams& dp, const Scenario& scenario,
                const ModelConstants& constants, StepWorkspace& ws, CrowdState& out);

// Map-level wrapper. Goals come from the scenario unless overridden; LIN needs
// none. Throws std::invalid_argument naming the agent on a missing goal or
// missing/invalid parameters.
Snapshot step(ModelKind kind, const Snapshot& crowd, const Scenario& scenario,
              const ModelParams& params, const ModelConstants& constants = {},
              const std::map<AgentId, Vec2>* goals_override = nullptr);

// Reusable one-agent transition with neighbors frozen at a reference crowd:
// the particle filter steps every particle through this. Evaluating it at the
// reference state itself reproduces step_one/step_crowd exactly.
struct FrozenAgentPrior {
  ModelKind kind = ModelKind::Lin;
  ParamRecord params{};
  Vec2 goal;
  std::vector<NeighborView> neighbors;
  const Scenario* scenario = nullptr;
  const ModelConstants* constants = nullptr;
  double dt = 0.04;

  AgentState operator()(const AgentState& self) const {
    thread_local std::vector<OrcaLine> lines;
    return step_one(kind, self, neighbors, goal, params, *scenario, *constants, dt,
                    nullptr, &lines);
  }
};

FrozenAgentPrior freeze_agent_prior(ModelKind kind, const CrowdState& crowd, size_t i,
                                    Vec2 goal, const DenseParams& dp,
                                    const Scenario& scenario,
                                    const ModelConstants& constants,
                                    StepWorkspace& ws);

}  // namespace crowdtrack
