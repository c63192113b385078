#include "crowdtrack/models/motion_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crowdtrack/core/grid.hpp"

namespace crowdtrack {

namespace {

// Brute force beats grid construction for small crowds.
constexpr size_t kBruteForceLimit = 48;

Vec2 cap_speed(Vec2 v, double cap) { return clamped_norm(v, cap); }

Vec2 separation_dir(Vec2 d) {
  double n = norm(d);
  if (n <= 1e-12) return {1.0, 0.0};  // coincident positions: +x tie-break
  return d / n;
}

AgentState integrate(const AgentState& self, Vec2 accel, double comfort,
                     const ModelConstants& c, double dt) {
  Vec2 v = self.vel + accel * dt;
  v = cap_speed(v, comfort);
  v = cap_speed(v, c.v_cap);
  return {self.pos + v * dt, v};
}

AgentState lin_step(const AgentState& self, const ModelConstants& c, double dt) {
  Vec2 v = cap_speed(self.vel, c.v_cap);
  return {self.pos + v * dt, v};
}

AgentState boids_step(const AgentState& self, std::span<const NeighborView> nbrs,
                      Vec2 goal, const ParamRecord& p, const Scenario& sc,
                      const ModelConstants& c, double dt) {
  const double r_self = p[pix::kBoidsRadius];
  const double comfort = p[pix::kBoidsComfort];
  const double accel_scale = comfort / c.tau;

  Vec2 a = c.boids_w_goal *
           ((preferred_velocity(self.pos, goal, comfort, dt) - self.vel) / c.tau);

  if (!nbrs.empty()) {
    Vec2 v_mean{}, com{};
    for (const NeighborView& nb : nbrs) {
      v_mean += nb.vel;
      com += nb.pos;
    }
    double inv_n = 1.0 / static_cast<double>(nbrs.size());
    a += c.boids_w_alignment * ((v_mean * inv_n - self.vel) / c.tau);
    a += (c.boids_w_cohesion * accel_scale) *
         normalized_or_zero(com * inv_n - self.pos);

    Vec2 ahead = self.pos + self.vel * c.boids_lookahead;
    for (const NeighborView& nb : nbrs) {
      Vec2 nb_ahead = nb.pos + nb.vel * c.boids_lookahead;
      double r_sum = r_self + nb.radius;
      double d = norm(ahead - nb_ahead);
      if (d < r_sum) {
        a += (c.boids_w_separation * accel_scale) * (1.0 - d / r_sum) *
             separation_dir(ahead - nb_ahead);
      }
    }
  }

  for (const Segment& seg : sc.obstacles) {
    Vec2 q = closest_point_on_segment(seg, self.pos);
    double threshold = std::max(2.0 * r_self, 0.5);
    double d = norm(self.pos - q);
    if (d < threshold) {
      a += (c.boids_w_separation * accel_scale) * (1.0 - d / threshold) *
           separation_dir(self.pos - q);
    }
  }

  return integrate(self, a, comfort, c, dt);
}

AgentState sf_step(const AgentState& self, std::span<const NeighborView> nbrs,
                   Vec2 goal, const ParamRecord& p, const Scenario& sc,
                   const ModelConstants& c, double dt) {
  const double r_self = p[pix::kSfRadius];
  const double comfort = p[pix::kSfComfort];

  // Motivation force toward the goal.
  Vec2 f = (preferred_velocity(self.pos, goal, comfort, dt) - self.vel) / c.tau;

  auto capped = [&](Vec2 term) { return clamped_norm(term, c.sf_force_cap); };

  for (const NeighborView& nb : nbrs) {
    double r_sum = r_self + nb.radius;
    Vec2 d = self.pos - nb.pos;
    double dist = norm(d);
    Vec2 dir = separation_dir(d);
    // Exponential social repulsion.
    f += capped(c.sf_repulsion_a * std::exp((r_sum - dist) / c.sf_repulsion_b) * dir);
    // Contact force only under overlap.
    if (dist < r_sum) f += capped(c.sf_contact_k * (r_sum - dist) * dir);
  }

  for (const Segment& seg : sc.obstacles) {
    Vec2 q = closest_point_on_segment(seg, self.pos);
    Vec2 d = self.pos - q;
    double dist = norm(d);
    if (dist - r_self > c.sf_cutoff) continue;
    Vec2 dir = separation_dir(d);
    f += capped(c.sf_repulsion_a * std::exp((r_self - dist) / c.sf_repulsion_b) * dir);
    if (dist < r_self) f += capped(c.sf_contact_k * (r_self - dist) * dir);
  }

  return integrate(self, f, comfort, c, dt);
}

AgentState rvo_step(const AgentState& self, std::span<const NeighborView> nbrs,
                    Vec2 goal, const ParamRecord& p, const Scenario& sc,
                    const ModelConstants& c, double dt, bool* feasible,
                    std::vector<OrcaLine>* line_scratch) {
  const double comfort = p[pix::kRvoComfort];
  const double radius = p[pix::kRvoRadius];
  const double inv_agent_h = 1.0 / p[pix::kRvoAgentHorizon];
  const double inv_obst_h = 1.0 / p[pix::kRvoObstacleHorizon];
  const double inv_dt = 1.0 / dt;

  std::vector<OrcaLine> local;
  std::vector<OrcaLine>& lines = line_scratch ? *line_scratch : local;
  lines.clear();

  // Obstacle constraints first (kept hard by the infeasibility fallback).
  // Each segment acts through its closest point, taken as a static point
  // obstacle the agent carries full (non-reciprocal) responsibility for.
  const double obst_reach = comfort * p[pix::kRvoObstacleHorizon] + radius + 1.0;
  for (const Segment& seg : sc.obstacles) {
    Vec2 q = closest_point_on_segment(seg, self.pos);
    if (norm(q - self.pos) > obst_reach) continue;
    lines.push_back(orca_line(q - self.pos, self.vel, radius, inv_obst_h, inv_dt,
                              self.vel, 1.0));
  }
  size_t obstacle_count = lines.size();

  for (const NeighborView& nb : nbrs) {
    lines.push_back(orca_line(nb.pos - self.pos, self.vel - nb.vel,
                              radius + nb.radius, inv_agent_h, inv_dt, self.vel, 0.5));
  }

  Vec2 v_pref = preferred_velocity(self.pos, goal, comfort, dt);
  Vec2 v = solve_orca(lines, obstacle_count, comfort, v_pref, feasible);
  v = cap_speed(v, c.v_cap);
  return {self.pos + v * dt, v};
}

void append_neighbor(const CrowdState& crowd, const DenseParams& dp, ModelKind kind,
                     size_t j, std::vector<NeighborView>& out) {
  double radius = dp.rows.empty() ? 0.0 : body_radius(kind, dp.rows[j]);
  out.push_back({crowd.st[j].pos, crowd.st[j].vel, radius});
}

}  // namespace

CrowdState CrowdState::from_snapshot(const Snapshot& snap) {
  CrowdState c;
  c.ids.reserve(snap.size());
  c.st.reserve(snap.size());
  for (const auto& [id, st] : snap) {
    c.ids.push_back(id);
    c.st.push_back(st);
  }
  return c;
}

Snapshot CrowdState::to_snapshot() const {
  Snapshot snap;
  for (size_t i = 0; i < ids.size(); ++i) snap[ids[i]] = st[i];
  return snap;
}

int CrowdState::index_of(AgentId id) const {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) return -1;
  return static_cast<int>(it - ids.begin());
}

DenseParams DenseParams::from(const ModelParams& params, std::span<const AgentId> ids) {
  params.validate(ids);
  DenseParams dp;
  dp.kind = params.kind;
  if (param_count(params.kind) == 0) return dp;
  dp.rows.reserve(ids.size());
  for (AgentId id : ids) dp.rows.push_back(params.per_agent.at(id));
  return dp;
}

Vec2 preferred_velocity(Vec2 pos, Vec2 goal, double comfort, double dt) {
  Vec2 d = goal - pos;
  double dist = norm(d);
  if (dist <= comfort * dt) return d / dt;  // arrive exactly this step
  return d * (comfort / dist);
}

AgentState step_one(ModelKind kind, const AgentState& self,
                    std::span<const NeighborView> neighbors, Vec2 goal,
                    const ParamRecord& params, const Scenario& scenario,
                    const ModelConstants& constants, double dt, bool* rvo_feasible,
                    std::vector<OrcaLine>* line_scratch) {
  switch (kind) {
    case ModelKind::Lin:
      return lin_step(self, constants, dt);
    case ModelKind::Boids:
      return boids_step(self, neighbors, goal, params, scenario, constants, dt);
    case ModelKind::SocialForces:
      return sf_step(self, neighbors, goal, params, scenario, constants, dt);
    case ModelKind::Rvo:
      return rvo_step(self, neighbors, goal, params, scenario, constants, dt,
                      rvo_feasible, line_scratch);
  }
  throw std::invalid_argument("step_one: bad model kind");
}

void StepWorkspace::prepare(const CrowdState& crowd) {
  grid_crowd = nullptr;
  if (crowd.size() <= kBruteForceLimit) return;
  positions.resize(crowd.size());
  for (size_t i = 0; i < crowd.size(); ++i) positions[i] = crowd.st[i].pos;
  if (!grid) grid = std::make_unique<NeighborGrid>(2.0);
  grid->build(positions);
  grid_crowd = &crowd;
}

void collect_neighbors(ModelKind kind, const CrowdState& crowd, const DenseParams& dp,
                       const ModelConstants& constants, size_t i, StepWorkspace& ws,
                       std::vector<NeighborView>& out) {
  out.clear();
  if (kind == ModelKind::Lin || crowd.size() < 2) return;

  double radius;
  switch (kind) {
    case ModelKind::Boids: radius = constants.boids_neighborhood; break;
    case ModelKind::SocialForces: radius = constants.sf_cutoff; break;
    default: radius = dp.rows[i][pix::kRvoNeighborDist]; break;
  }

  ws.candidates.clear();
  const Vec2 center = crowd.st[i].pos;
  if (ws.grid_crowd == &crowd && ws.grid) {
    ws.grid->query(center, radius, static_cast<int>(i), ws.candidates);
  } else {
    const double r2 = radius * radius;
    for (size_t j = 0; j < crowd.size(); ++j) {
      if (j == i) continue;
      if (norm_sq(crowd.st[j].pos - center) <= r2) {
        ws.candidates.push_back(static_cast<int>(j));
      }
    }
  }

  if (kind == ModelKind::Rvo &&
      ws.candidates.size() > static_cast<size_t>(constants.rvo_max_neighbors)) {
    ws.ranked.clear();
    for (int j : ws.candidates) {
      ws.ranked.emplace_back(norm_sq(crowd.st[j].pos - center), j);
    }
    auto mid = ws.ranked.begin() + constants.rvo_max_neighbors;
    std::partial_sort(ws.ranked.begin(), mid, ws.ranked.end());
    ws.candidates.clear();
    for (auto it = ws.ranked.begin(); it != mid; ++it) ws.candidates.push_back(it->second);
  }

  for (int j : ws.candidates) {
    append_neighbor(crowd, dp, kind, static_cast<size_t>(j), out);
  }
}

void step_crowd(ModelKind kind, const CrowdState& in, std::span<const Vec2> goals,
                const DenseParams& dp, const Scenario& scenario,
                const ModelConstants& constants, StepWorkspace& ws, CrowdState& out) {
  if (goals.size() != in.size() && kind != ModelKind::Lin) {
    throw std::invalid_argument("step_crowd: goals not aligned with crowd");
  }
  out.ids = in.ids;
  out.st.resize(in.size());
  ws.prepare(in);
  static const ParamRecord kNoParams{};
  for (size_t i = 0; i < in.size(); ++i) {
    collect_neighbors(kind, in, dp, constants, i, ws, ws.neighbors);
    const ParamRecord& pr = dp.rows.empty() ? kNoParams : dp.rows[i];
    Vec2 goal = goals.empty() ? Vec2{} : goals[i];
    out.st[i] = step_one(kind, in.st[i], ws.neighbors, goal, pr, scenario, constants,
                         scenario.dt, nullptr, &ws.lines);
  }
}

Snapshot step(ModelKind kind, const Snapshot& crowd, const Scenario& scenario,
              const ModelParams& params, const ModelConstants& constants,
              const std::map<AgentId, Vec2>* goals_override) {
  if (params.kind != kind) {
    throw std::invalid_argument("step: params built for a different model kind");
  }
  CrowdState in = CrowdState::from_snapshot(crowd);
  DenseParams dp = DenseParams::from(params, in.ids);

  std::vector<Vec2> goals(in.size());
  if (kind != ModelKind::Lin) {
    for (size_t i = 0; i < in.size(); ++i) {
      const std::map<AgentId, Vec2>* src =
          goals_override ? goals_override : &scenario.goals;
      auto it = src->find(in.ids[i]);
      if (it == src->end()) {
        throw std::invalid_argument("step: missing goal for agent " +
                                    std::to_string(in.ids[i]));
      }
      goals[i] = it->second;
    }
  }

  StepWorkspace ws;
  CrowdState out;
  step_crowd(kind, in, goals, dp, scenario, constants, ws, out);
  return out.to_snapshot();
}

FrozenAgentPrior freeze_agent_prior(ModelKind kind, const CrowdState& crowd, size_t i,
                                    Vec2 goal, const DenseParams& dp,
                                    const Scenario& scenario,
                                    const ModelConstants& constants,
                                    StepWorkspace& ws) {
  FrozenAgentPrior prior;
  prior.kind = kind;
  prior.params = dp.rows.empty() ? ParamRecord{} : dp.rows[i];
  prior.goal = goal;
  prior.scenario = &scenario;
  prior.constants = &constants;
  prior.dt = scenario.dt;
  collect_neighbors(kind, crowd, dp, constants, i, ws, prior.neighbors);
  return prior;
}

}  // namespace crowdtrack
