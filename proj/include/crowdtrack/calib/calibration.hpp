#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "crowdtrack/calib/optimizers.hpp"
#include "crowdtrack/core/scenario.hpp"
#include "crowdtrack/core/state_history.hpp"
#include "crowdtrack/models/model_params.hpp"
#include "crowdtrack/models/motion_model.hpp"

namespace crowdtrack {

enum class SelectionMode : uint8_t { Global = 0, PerAgent = 1 };

const char* to_string(SelectionMode mode);
SelectionMode selection_mode_from_string(const std::string& name);

// Two replay errors within this slack count as a tie, resolved by preferring
// the cheaper (earlier-ordered) model.
inline constexpr double kModelTieEpsilon = 1e-9;

// Agents the replay can both initialize (oldest frame) and aim (newest frame):
// exactly those present in every window frame. Transient agents are excluded
// from the simulation entirely.
struct ReplayBreakdown {
  double total = 0.0;
  std::map<AgentId, double> per_agent;
};

// Reset the crowd to the oldest window snapshot, aim every agent at its
// newest-frame position, step `kind` through the window, and accumulate the
// position distance to each recorded intermediate frame. The first frame is
// copied exactly and contributes zero.
double replay_error(ModelKind kind, const ModelParams& params,
                    const StateHistory& window, const Scenario& scenario,
                    const ModelConstants& constants = {});
ReplayBreakdown replay_error_breakdown(ModelKind kind, const ModelParams& params,
                                       const StateHistory& window,
                                       const Scenario& scenario,
                                       const ModelConstants& constants = {});

struct ModelFit {
  ModelParams params;
  double error = 0.0;
  std::map<AgentId, double> per_agent_error;
  int64_t evaluations = 0;
};

// Fit `kind`'s per-agent parameters to the window. Each agent's handful of
// parameters is searched independently against its conditional replay error —
// the agent replays under the candidate while everyone else follows the
// recorded frames, which is exactly how tracking later applies the prior
// (neighbors frozen at their latest estimates). Fresh fits run two sweeps so
// neighbor rows converge off the mean column; warm-started fits (previous
// best for this kind; agents it lacks start at the mean column) continue in
// one. Reported error = sum of per-agent conditional errors under the final
// table; spec.max_evaluations caps the total across agents (0 = unlimited,
// stagnation-governed). LIN short-circuits: empty parameters, raw replay
// error, zero evaluations.
ModelFit optimize_params(ModelKind kind, const StateHistory& window,
                         const Scenario& scenario, const ModelConstants& constants,
                         const OptimizerSpec& spec, const ModelParams* warm = nullptr);

struct CalibrationResult {
  ModelKind best_kind = ModelKind::Lin;  // argmin of total error (global view)
  ModelParams best_params;               // the winning model's parameters
  std::map<AgentId, ModelKind> per_agent_kind;
  std::map<ModelKind, double> per_model_error;
  std::map<ModelKind, ModelParams> per_model_params;
  std::map<ModelKind, std::map<AgentId, double>> per_model_agent_error;
  SelectionMode mode = SelectionMode::PerAgent;
  int64_t evaluations_used = 0;
  double wall_time_s = 0.0;
};

// JSON object for one calibration window: selection mode, chosen model(s),
// fitted per-model parameters, per-model replay errors, evaluations used and
// wall time. Reports from consecutive windows concatenate into a JSON array.
std::string calibration_result_json(const CalibrationResult& result);

using WarmStartTable = std::map<ModelKind, ModelParams>;

// Optimize every candidate model against the window and pick winners: global
// mode keys one model off total error; per-agent mode keys each agent off its
// own error contribution. Ties prefer the earlier-ordered model within
// kModelTieEpsilon. `kinds` restricts the candidate set (forced single-model
// baselines pass exactly one).
CalibrationResult select_model(const StateHistory& window, const Scenario& scenario,
                               const ModelConstants& constants,
                               const OptimizerSpec& spec, SelectionMode mode,
                               const WarmStartTable* warm = nullptr,
                               std::span<const ModelKind> kinds = kAllModels);

// One step of the selected model(s) at the scenario's timestep. Goals
// extrapolate goal_horizon seconds along each agent's current velocity (live
// tracking has no oracle goals). Per-agent mode steps each agent under its own
// model while it perceives all others' current states; agents missing from a
// parameter table fall back to the mean column, and agents without an
// assigned kind fall back to LIN.
Snapshot predict_next(const CalibrationResult& result, const Snapshot& current,
                      const Scenario& scenario, const ModelConstants& constants,
                      double goal_horizon = 2.0);

// DenseParams aligned with `ids` taking rows from `table` where present and
// the mean column elsewhere. Shared by prediction and the tracker.
DenseParams dense_params_or_means(ModelKind kind, const ModelParams& table,
                                  std::span<const AgentId> ids);

struct CalibrationConfig {
  OptimizerSpec init_spec;   // first full window: generous budget
  OptimizerSpec live_spec;   // steady state: small warm-started budget
  SelectionMode mode = SelectionMode::PerAgent;
  int recalibrate_every = 5;

  CalibrationConfig();
};

// Stateful wrapper holding the warm-start table: the first calibration runs
// the init spec cold, later ones run the live spec seeded with the previous
// window's best parameters per model.
class CalibrationEngine {
 public:
  CalibrationEngine(CalibrationConfig config, uint64_t seed);

  const CalibrationConfig& config() const { return config_; }

  // `frozen` agents keep their previous parameters and model choice: a window
  // built from estimates of an unobserved agent only mirrors what the prior
  // already guessed, so refitting it would confirm hallucinated motion.
  CalibrationResult calibrate(const StateHistory& window, const Scenario& scenario,
                              const ModelConstants& constants, int64_t frame,
                              std::span<const ModelKind> kinds = kAllModels,
                              std::span<const AgentId> frozen = {});

  bool calibrated_once() const { return !first_; }

 private:
  CalibrationConfig config_;
  uint64_t seed_;
  bool first_ = true;
  WarmStartTable warm_;
  std::map<AgentId, ModelKind> last_kinds_;
};

}  // namespace crowdtrack
