#include "crowdtrack/calib/calibration.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace crowdtrack {

const char* to_string(SelectionMode mode) {
  return mode == SelectionMode::Global ? "global" : "per-agent";
}

SelectionMode selection_mode_from_string(const std::string& name) {
  if (name == "global") return SelectionMode::Global;
  if (name == "per-agent" || name == "per_agent") return SelectionMode::PerAgent;
  throw std::invalid_argument("unknown selection mode: " + name);
}

namespace {

ParamRecord mean_record(ModelKind kind) {
  ParamRecord r{};
  auto defs = param_defs(kind);
  for (size_t d = 0; d < defs.size(); ++d) r[d] = defs[d].mean;
  return r;
}

// Window unpacked into dense, allocation-free replay scratch. One context per
// (window, kind) serves every cost evaluation of that model's optimization.
struct ReplayContext {
  ModelKind kind = ModelKind::Lin;
  const Scenario* scenario = nullptr;
  const ModelConstants* constants = nullptr;
  double dt = 0.04;
  std::vector<AgentId> ids;
  CrowdState init;
  std::vector<std::vector<Vec2>> ref;  // [step][agent], steps 1..size-1
  std::vector<Vec2> goals;

  CrowdState cur, nxt;
  StepWorkspace ws;
  DenseParams dp;
  std::vector<double> agent_acc;

  void build(ModelKind k, const StateHistory& window, const Scenario& scn,
             const ModelConstants& cst) {
    if (window.size() < 2) {
      throw std::invalid_argument("replay: window must hold at least 2 frames");
    }
    if (std::abs(window.dt() - scn.dt) > 1e-12) {
      throw std::invalid_argument("replay: window dt does not match scenario dt");
    }
    kind = k;
    scenario = &scn;
    constants = &cst;
    dt = window.dt();
    ids = window.agents_in_all_frames();

    init.ids = ids;
    init.st.resize(ids.size());
    const Snapshot& oldest = window.oldest();
    for (size_t i = 0; i < ids.size(); ++i) init.st[i] = oldest.at(ids[i]);

    ref.assign(window.size() - 1, std::vector<Vec2>(ids.size()));
    for (size_t j = 1; j < window.size(); ++j) {
      const Snapshot& snap = window.snapshot(j);
      for (size_t i = 0; i < ids.size(); ++i) ref[j - 1][i] = snap.at(ids[i]).pos;
    }

    goals.resize(ids.size());
    const Snapshot& newest = window.newest();
    for (size_t i = 0; i < ids.size(); ++i) goals[i] = newest.at(ids[i]).pos;

    dp.kind = kind;
    dp.rows.assign(ids.size(), ParamRecord{});
    agent_acc.resize(ids.size());
  }

  size_t params_per_agent() const { return param_count(kind); }

  void load_vector(const std::vector<double>& x) {
    const size_t p = params_per_agent();
    for (size_t i = 0; i < ids.size(); ++i) {
      for (size_t d = 0; d < p; ++d) dp.rows[i][d] = x[i * p + d];
    }
  }

  // Total replay error for the parameters currently in dp; per-agent split
  // left in agent_acc.
  double run() {
    std::fill(agent_acc.begin(), agent_acc.end(), 0.0);
    cur = init;
    double total = 0.0;
    for (size_t j = 0; j < ref.size(); ++j) {
      step_crowd(kind, cur, goals, dp, *scenario, *constants, ws, nxt);
      for (size_t i = 0; i < ids.size(); ++i) {
        double d = norm(nxt.st[i].pos - ref[j][i]);
        agent_acc[i] += d;
        total += d;
      }
      std::swap(cur, nxt);
    }
    return total;
  }
};

// Conditional replay scratch: one agent rolls candidate parameters through
// the window while every other agent follows the recorded frames. This is
// exactly how tracking applies a prior (neighbors frozen at their latest
// estimates), and it splits the fit into independent searches over one
// agent's handful of parameters — a joint search over the concatenated
// vector cannot descend in 5n dimensions on any realistic budget.
struct ConditionalContext {
  ModelKind kind = ModelKind::Lin;
  const Scenario* scenario = nullptr;
  const ModelConstants* constants = nullptr;
  std::vector<AgentId> ids;
  std::vector<CrowdState> rec;  // recorded window, oldest first
  std::vector<Vec2> goals;      // newest window positions (replay convention)
  DenseParams table;            // current rows: candidate's neighbors read these
  StepWorkspace ws;

  void build(ModelKind k, const StateHistory& window, const Scenario& scn,
             const ModelConstants& cst) {
    if (window.size() < 2) {
      throw std::invalid_argument("replay: window must hold at least 2 frames");
    }
    if (std::abs(window.dt() - scn.dt) > 1e-12) {
      throw std::invalid_argument("replay: window dt does not match scenario dt");
    }
    kind = k;
    scenario = &scn;
    constants = &cst;
    ids = window.agents_in_all_frames();
    rec.clear();
    rec.reserve(window.size());
    for (size_t j = 0; j < window.size(); ++j) {
      CrowdState cs;
      cs.ids = ids;
      cs.st.reserve(ids.size());
      const Snapshot& snap = window.snapshot(j);
      for (AgentId id : ids) cs.st.push_back(snap.at(id));
      rec.push_back(std::move(cs));
    }
    goals.resize(ids.size());
    for (size_t i = 0; i < ids.size(); ++i) goals[i] = rec.back().st[i].pos;
    table.kind = kind;
    table.rows.assign(ids.size(), mean_record(kind));
  }

  // Window replay error of `cand` for agent i, neighbors on the recorded
  // frames under `table` rows. The recorded frames double as scratch: only
  // the candidate's own slot is rewritten per step and restored afterwards,
  // so no crowd copies happen in the eval loop.
  double cost(size_t i, const ParamRecord& cand) {
    AgentState st = rec[0].st[i];
    const ParamRecord saved = table.rows[i];
    table.rows[i] = cand;
    FrozenAgentPrior prior;  // hoisted so the neighbor vector keeps its capacity
    prior.kind = kind;
    prior.params = cand;
    prior.goal = goals[i];
    prior.scenario = scenario;
    prior.constants = constants;
    prior.dt = scenario->dt;
    ws.grid_crowd = nullptr;
    double err = 0.0;
    for (size_t j = 0; j + 1 < rec.size(); ++j) {
      CrowdState& frame = rec[j];
      const AgentState recorded = frame.st[i];
      frame.st[i] = st;
      collect_neighbors(kind, frame, table, *constants, i, ws, prior.neighbors);
      st = prior(st);
      frame.st[i] = recorded;
      err += norm(st.pos - rec[j + 1].st[i].pos);
    }
    table.rows[i] = saved;
    return err;
  }
};


}  // namespace

double replay_error(ModelKind kind, const ModelParams& params,
                    const StateHistory& window, const Scenario& scenario,
                    const ModelConstants& constants) {
  ReplayContext ctx;
  ctx.build(kind, window, scenario, constants);
  ctx.dp = dense_params_or_means(kind, params, ctx.ids);
  return ctx.run();
}

ReplayBreakdown replay_error_breakdown(ModelKind kind, const ModelParams& params,
                                       const StateHistory& window,
                                       const Scenario& scenario,
                                       const ModelConstants& constants) {
  ReplayContext ctx;
  ctx.build(kind, window, scenario, constants);
  ctx.dp = dense_params_or_means(kind, params, ctx.ids);
  ReplayBreakdown out;
  out.total = ctx.run();
  for (size_t i = 0; i < ctx.ids.size(); ++i) out.per_agent[ctx.ids[i]] = ctx.agent_acc[i];
  return out;
}

DenseParams dense_params_or_means(ModelKind kind, const ModelParams& table,
                                  std::span<const AgentId> ids) {
  DenseParams dp;
  dp.kind = kind;
  dp.rows.reserve(ids.size());
  const ParamRecord means = mean_record(kind);
  for (AgentId id : ids) {
    auto it = table.per_agent.find(id);
    dp.rows.push_back(it != table.per_agent.end() ? it->second : means);
  }
  return dp;
}

ModelFit optimize_params(ModelKind kind, const StateHistory& window,
                         const Scenario& scenario, const ModelConstants& constants,
                         const OptimizerSpec& spec, const ModelParams* warm) {
  ModelFit fit;
  fit.params.kind = kind;

  if (kind == ModelKind::Lin) {
    ReplayContext ctx;
    ctx.build(kind, window, scenario, constants);
    if (ctx.ids.empty()) return fit;
    fit.error = ctx.run();
    for (size_t i = 0; i < ctx.ids.size(); ++i) {
      fit.per_agent_error[ctx.ids[i]] = ctx.agent_acc[i];
    }
    return fit;
  }

  ConditionalContext ctx;
  ctx.build(kind, window, scenario, constants);
  if (ctx.ids.empty()) return fit;

  const bool has_warm = warm != nullptr;
  if (has_warm) ctx.table = dense_params_or_means(kind, *warm, ctx.ids);

  auto defs = param_defs(kind);
  ParamSpace space;
  space.dims.reserve(defs.size());
  for (const ParamDef& def : defs) {
    space.dims.push_back(ParamDim{def.name, def.lo, def.hi, def.mean, def.speed_prior});
  }

  // Fresh fits run two Jacobi sweeps so neighbor rows (which shape every
  // avoidance constraint) converge away from the generic mean column; a
  // warm-started call continues an already-consistent table in one sweep.
  const int sweeps = has_warm ? 1 : 2;
  const int64_t n = static_cast<int64_t>(ctx.ids.size());
  int64_t per_agent_cap = 0;
  if (spec.max_evaluations > 0) {
    const int64_t floor_evals =
        spec.method == OptimMethod::Genetic ? std::max<int64_t>(8, spec.pool_size) : 8;
    per_agent_cap = std::max((spec.max_evaluations - n) / (n * sweeps), floor_evals);
  }

  for (int sweep = 0; sweep < sweeps; ++sweep) {
    std::vector<ParamRecord> next_rows = ctx.table.rows;
    for (size_t i = 0; i < ctx.ids.size(); ++i) {
      CostFn cost = [&ctx, i](const std::vector<double>& x) {
        ParamRecord cand{};
        for (size_t d = 0; d < x.size(); ++d) cand[d] = x[d];
        return ctx.cost(i, cand);
      };

      OptimizerSpec agent_spec = spec;
      agent_spec.max_evaluations = per_agent_cap;
      agent_spec.rng_seed = RngStream::keyed(spec.rng_seed, 0x63616c69u,
                                             static_cast<uint64_t>(ctx.ids[i]),
                                             static_cast<uint64_t>(sweep))
                                .next_u64();

      // Seed slot: the current table row — the Table-1 mean column on a fresh
      // fit, the warm/previous-sweep row otherwise.
      std::vector<double> seed_point(defs.size());
      for (size_t d = 0; d < defs.size(); ++d) seed_point[d] = ctx.table.rows[i][d];
      std::vector<std::vector<double>> warm_points{std::move(seed_point)};

      OptimResult r = run_optimizer(space, cost, agent_spec, warm_points);
      fit.evaluations += r.evaluations;
      for (size_t d = 0; d < r.best_point.size(); ++d) next_rows[i][d] = r.best_point[d];
    }
    ctx.table.rows = std::move(next_rows);
  }

  // Scoring pass under the final table so per-agent errors are mutually
  // consistent (each agent's search ran against the previous sweep's rows).
  fit.error = 0.0;
  for (size_t i = 0; i < ctx.ids.size(); ++i) {
    double e = ctx.cost(i, ctx.table.rows[i]);
    fit.per_agent_error[ctx.ids[i]] = e;
    fit.error += e;
  }
  fit.evaluations += n;

  for (size_t i = 0; i < ctx.ids.size(); ++i) {
    fit.params.per_agent[ctx.ids[i]] = ctx.table.rows[i];
  }
  return fit;
}

CalibrationResult select_model(const StateHistory& window, const Scenario& scenario,
                               const ModelConstants& constants,
                               const OptimizerSpec& spec, SelectionMode mode,
                               const WarmStartTable* warm,
                               std::span<const ModelKind> kinds) {
  auto t0 = std::chrono::steady_clock::now();
  if (kinds.empty()) throw std::invalid_argument("select_model: empty kind set");

  CalibrationResult res;
  res.mode = mode;
  for (ModelKind kind : kinds) {
    const ModelParams* w = nullptr;
    if (warm != nullptr) {
      auto it = warm->find(kind);
      if (it != warm->end()) w = &it->second;
    }
    ModelFit fit = optimize_params(kind, window, scenario, constants, spec, w);
    res.per_model_error[kind] = fit.error;
    res.per_model_params[kind] = std::move(fit.params);
    res.per_model_agent_error[kind] = std::move(fit.per_agent_error);
    res.evaluations_used += fit.evaluations;
  }

  // Global winner: earlier-ordered model keeps ties within the epsilon.
  res.best_kind = kinds.front();
  double best_err = res.per_model_error.at(kinds.front());
  for (ModelKind kind : kinds) {
    double e = res.per_model_error.at(kind);
    if (e < best_err - kModelTieEpsilon) {
      best_err = e;
      res.best_kind = kind;
    }
  }
  res.best_params = res.per_model_params.at(res.best_kind);

  for (AgentId id : window.agents_in_all_frames()) {
    if (mode == SelectionMode::Global) {
      res.per_agent_kind[id] = res.best_kind;
      continue;
    }
    ModelKind pick = kinds.front();
    double e_pick = res.per_model_agent_error.at(kinds.front()).at(id);
    for (ModelKind kind : kinds) {
      double e = res.per_model_agent_error.at(kind).at(id);
      if (e < e_pick - kModelTieEpsilon) {
        e_pick = e;
        pick = kind;
      }
    }
    res.per_agent_kind[id] = pick;
  }

  res.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

std::string calibration_result_json(const CalibrationResult& result) {
  nlohmann::json j;
  j["mode"] = to_string(result.mode);
  j["best_model"] = to_string(result.best_kind);
  nlohmann::json per_agent = nlohmann::json::object();
  for (const auto& [id, kind] : result.per_agent_kind) {
    per_agent[std::to_string(id)] = to_string(kind);
  }
  j["per_agent_model"] = per_agent;
  nlohmann::json errors = nlohmann::json::object();
  for (const auto& [kind, err] : result.per_model_error) {
    errors[to_string(kind)] = err;
  }
  j["per_model_error"] = errors;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [kind, table] : result.per_model_params) {
    nlohmann::json rows = nlohmann::json::object();
    auto defs = param_defs(kind);
    for (const auto& [id, row] : table.per_agent) {
      nlohmann::json rec = nlohmann::json::object();
      for (size_t d = 0; d < defs.size(); ++d) rec[defs[d].name] = row[d];
      rows[std::to_string(id)] = rec;
    }
    params[to_string(kind)] = rows;
  }
  j["per_model_params"] = params;
  j["evaluations_used"] = result.evaluations_used;
  j["wall_time_s"] = result.wall_time_s;
  return j.dump(2);
}

Snapshot predict_next(const CalibrationResult& result, const Snapshot& current,
                      const Scenario& scenario, const ModelConstants& constants,
                      double goal_horizon) {
  CrowdState cur = CrowdState::from_snapshot(current);
  const size_t n = cur.size();

  std::vector<Vec2> goals(n);
  for (size_t i = 0; i < n; ++i) {
    goals[i] = cur.st[i].pos + cur.st[i].vel * goal_horizon;
  }

  std::vector<ModelKind> kind_of(n, ModelKind::Lin);
  for (size_t i = 0; i < n; ++i) {
    auto it = result.per_agent_kind.find(cur.ids[i]);
    if (it != result.per_agent_kind.end()) kind_of[i] = it->second;
  }

  static const ModelParams kEmptyParams{};
  Snapshot out;
  StepWorkspace ws;
  CrowdState stepped;
  for (ModelKind kind : kAllModels) {
    bool any = false;
    for (size_t i = 0; i < n; ++i) any = any || kind_of[i] == kind;
    if (!any) continue;
    auto pit = result.per_model_params.find(kind);
    const ModelParams& table = pit != result.per_model_params.end() ? pit->second
                                                                    : kEmptyParams;
    DenseParams dp = dense_params_or_means(kind, table, cur.ids);
    step_crowd(kind, cur, goals, dp, scenario, constants, ws, stepped);
    for (size_t i = 0; i < n; ++i) {
      if (kind_of[i] == kind) out[cur.ids[i]] = stepped.st[i];
    }
  }
  return out;
}

// Budgets are stagnation-governed: each per-agent search runs until K
// consecutive generations bring no improvement. The first window gets a
// patient K; live recalibrations are warm-started and only nudge parameters,
// so the filter — not the optimizer — dominates the frame budget.
CalibrationConfig::CalibrationConfig() {
  init_spec.method = OptimMethod::Genetic;
  init_spec.stagnation_k = 5;
  init_spec.pool_size = 8;
  init_spec.max_evaluations = 0;

  live_spec.method = OptimMethod::Genetic;
  live_spec.stagnation_k = 1;
  live_spec.pool_size = 6;
  live_spec.max_evaluations = 0;
}

CalibrationEngine::CalibrationEngine(CalibrationConfig config, uint64_t seed)
    : config_(std::move(config)), seed_(seed) {
  config_.init_spec.validate();
  config_.live_spec.validate();
  if (config_.recalibrate_every < 1) {
    throw std::invalid_argument("calibration: recalibrate_every must be >= 1");
  }
}

CalibrationResult CalibrationEngine::calibrate(const StateHistory& window,
                                               const Scenario& scenario,
                                               const ModelConstants& constants,
                                               int64_t frame,
                                               std::span<const ModelKind> kinds,
                                               std::span<const AgentId> frozen) {
  OptimizerSpec spec = first_ ? config_.init_spec : config_.live_spec;
  spec.rng_seed = mix_key(seed_, static_cast<uint64_t>(frame));
  CalibrationResult res = select_model(window, scenario, constants, spec,
                                       config_.mode, first_ ? nullptr : &warm_, kinds);

  // Restore frozen agents from the previous round (when one exists) in both
  // the result and the warm chain, so hallucinated fits never accumulate.
  if (!first_) {
    for (AgentId id : frozen) {
      for (auto& [kind, params] : res.per_model_params) {
        auto wk = warm_.find(kind);
        if (wk == warm_.end()) continue;
        auto row = wk->second.per_agent.find(id);
        if (row != wk->second.per_agent.end()) params.per_agent[id] = row->second;
      }
      auto lk = last_kinds_.find(id);
      if (lk != last_kinds_.end()) {
        auto pk = res.per_agent_kind.find(id);
        if (pk != res.per_agent_kind.end()) pk->second = lk->second;
      }
    }
    if (!frozen.empty()) res.best_params = res.per_model_params.at(res.best_kind);
  }

  warm_ = res.per_model_params;
  last_kinds_ = res.per_agent_kind;
  first_ = false;
  return res;
}

}  // namespace crowdtrack
