#include "crowdtrack/synth/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "crowdtrack/core/rng.hpp"
#include "crowdtrack/models/motion_model.hpp"

namespace crowdtrack {

namespace {
constexpr uint64_t kPlaceKey = 0x706c6163ull;    // placement jitter
constexpr uint64_t kSpeedKey = 0x73706472ull;    // initial speed draws
constexpr uint64_t kNoiseKey = 0x6e6f6973ull;    // observation noise
constexpr uint64_t kDropKey = 0x64726f70ull;     // observation dropout
constexpr uint64_t kOcclusionKey = 0x6f63636cull;  // burst occlusion episodes
constexpr uint64_t kParamKey = 0x70726d73ull;    // benchmark parameter draws
constexpr double kTwoPi = 6.283185307179586476925287;
}  // namespace

const char* to_string(TemplateKind kind) {
  switch (kind) {
    case TemplateKind::Crossing: return "crossing";
    case TemplateKind::HeadOnCorridor: return "head_on_corridor";
    case TemplateKind::CircleSwap: return "circle_swap";
    case TemplateKind::RandomGoals: return "random_goals";
  }
  return "?";
}

TemplateKind template_kind_from_string(const std::string& name) {
  for (TemplateKind k : {TemplateKind::Crossing, TemplateKind::HeadOnCorridor,
                         TemplateKind::CircleSwap, TemplateKind::RandomGoals}) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown scenario template: " + name);
}

const char* to_string(DensityClass d) {
  switch (d) {
    case DensityClass::Low: return "low";
    case DensityClass::Medium: return "medium";
    case DensityClass::High: return "high";
  }
  return "?";
}

DensityClass density_class_from_string(const std::string& name) {
  if (name == "low") return DensityClass::Low;
  if (name == "medium") return DensityClass::Medium;
  if (name == "high") return DensityClass::High;
  throw std::invalid_argument("unknown density class: " + name);
}

double density_value(DensityClass d) {
  switch (d) {
    case DensityClass::Low: return 0.3;
    case DensityClass::Medium: return 1.0;
    case DensityClass::High: return 2.5;
  }
  return 1.0;
}

namespace {

struct Placement {
  std::vector<Vec2> pos;    // nominal grid/circle positions, pre-jitter
  std::vector<Vec2> goals;
  std::vector<Segment> obstacles;
};

double max_body_radius(ModelKind kind, const ModelParams& params, int n) {
  if (kind == ModelKind::Lin) return 0.2;  // nominal footprint
  double r = 0.0;
  for (int i = 0; i < n; ++i) {
    auto it = params.per_agent.find(static_cast<AgentId>(i));
    if (it != params.per_agent.end()) {
      r = std::max(r, body_radius(kind, it->second));
    } else {
      auto defs = param_defs(kind);
      ParamRecord means{};
      for (size_t d = 0; d < defs.size(); ++d) means[d] = defs[d].mean;
      r = std::max(r, body_radius(kind, means));
    }
  }
  return r;
}

Placement place_crossing(int n, double s) {
  Placement p;
  int na = (n + 1) / 2, nb = n / 2;
  int cols_a = std::max(1, static_cast<int>(std::ceil(std::sqrt(na))));
  int cols_b = std::max(1, static_cast<int>(std::ceil(std::sqrt(std::max(nb, 1)))));
  double reach = 3.0 + 2.0 * s;
  // Stream A walks +x along y~0, stream B walks +y along x~0.
  for (int j = 0; j < na; ++j) {
    int c = j % cols_a, r = j / cols_a;
    int rows = (na + cols_a - 1) / cols_a;
    double x = -reach - c * s;
    double y = (r - (rows - 1) * 0.5) * s;
    p.pos.push_back({x, y});
    p.goals.push_back({-x, y});
  }
  for (int j = 0; j < nb; ++j) {
    int c = j % cols_b, r = j / cols_b;
    int cols = std::min(cols_b, nb);
    double x = (c - (cols - 1) * 0.5) * s;
    double y = -reach - r * s;
    p.pos.push_back({x, y});
    p.goals.push_back({x, -y});
  }
  return p;
}

Placement place_corridor(int n, double s) {
  Placement p;
  int nl = (n + 1) / 2, nr = n / 2;
  int rows = std::max(1, static_cast<int>(std::floor(std::sqrt(std::max(nl, 1)))));
  int cols_l = (nl + rows - 1) / rows;
  int cols_r = nr > 0 ? (nr + rows - 1) / rows : 0;
  double gap = 6.0;
  for (int j = 0; j < nl; ++j) {
    int c = j / rows, r = j % rows;
    double x = -gap * 0.5 - c * s;
    double y = (r - (rows - 1) * 0.5) * s;
    p.pos.push_back({x, y});
    p.goals.push_back({-x, y});
  }
  for (int j = 0; j < nr; ++j) {
    int c = j / rows, r = j % rows;
    double x = gap * 0.5 + c * s;
    double y = (r - (rows - 1) * 0.5) * s;
    p.pos.push_back({x, y});
    p.goals.push_back({-x, y});
  }
  double half_w = ((rows - 1) * 0.5 + 1.0) * s;
  double half_l = gap * 0.5 + std::max(cols_l, cols_r) * s + 3.0;
  p.obstacles.push_back({{-half_l, -half_w}, {half_l, -half_w}});
  p.obstacles.push_back({{-half_l, half_w}, {half_l, half_w}});
  return p;
}

Placement place_circle(int n, double s) {
  Placement p;
  double radius = std::max(3.0, n * s / kTwoPi);
  for (int i = 0; i < n; ++i) {
    double a = kTwoPi * i / n;
    Vec2 q{radius * std::cos(a), radius * std::sin(a)};
    p.pos.push_back(q);
    p.goals.push_back({-q.x, -q.y});
  }
  return p;
}

bool separated(const std::vector<Vec2>& pos, double min_dist) {
  for (size_t i = 0; i < pos.size(); ++i) {
    for (size_t j = i + 1; j < pos.size(); ++j) {
      if (norm_sq(pos[i] - pos[j]) <= min_dist * min_dist) return false;
    }
  }
  return true;
}

}  // namespace

SynthOutput generate(const ScenarioTemplate& tmpl, ModelKind kind,
                     const ModelParams& params, int frames, double dt) {
  if (frames < 2) throw std::invalid_argument("generate: frames must be >= 2");
  if (dt <= 0.0) throw std::invalid_argument("generate: dt must be positive");
  if (tmpl.explicit_initial.empty() && tmpl.agent_count < 1) {
    throw std::invalid_argument("generate: agent_count must be >= 1");
  }

  SynthOutput out;
  out.provenance = {kind, params, tmpl.rng_seed};
  out.provenance.params.kind = kind;
  out.scenario.dt = dt;

  CrowdState crowd;
  std::vector<Vec2> goals;
  std::vector<Segment> obstacles;

  if (!tmpl.explicit_initial.empty()) {
    crowd = CrowdState::from_snapshot(tmpl.explicit_initial);
    for (size_t i = 0; i < crowd.size(); ++i) {
      auto it = tmpl.explicit_goals.find(crowd.ids[i]);
      goals.push_back(it != tmpl.explicit_goals.end()
                          ? it->second
                          : crowd.st[i].pos + crowd.st[i].vel * 60.0);
    }
  } else {
    const int n = tmpl.agent_count;
    const double max_r = max_body_radius(kind, params, n);
    // Spacing from the density class, floored so the separation invariant is
    // reachable at all; jitter stays inside half the remaining margin.
    double s = std::max(std::sqrt(1.0 / density_value(tmpl.density)),
                        2.0 * max_r + 0.1);
    double min_dist = 2.0 * max_r;
    double jitter = std::min(0.15 * s, 0.5 * (s - min_dist) / (2.0 * 1.4142135624));

    bool placed = false;
    std::vector<Vec2> base_pos;
    for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
      RngStream rng = RngStream::keyed(tmpl.rng_seed, kPlaceKey,
                                       static_cast<uint64_t>(attempt));
      Placement p;
      switch (tmpl.kind) {
        case TemplateKind::Crossing: p = place_crossing(n, s); break;
        case TemplateKind::HeadOnCorridor: p = place_corridor(n, s); break;
        case TemplateKind::CircleSwap: p = place_circle(n, s); break;
        case TemplateKind::RandomGoals: {
          double side = std::max(6.0, std::sqrt(n / density_value(tmpl.density)));
          for (int i = 0; i < n; ++i) {
            p.pos.push_back({rng.uniform(-side * 0.5, side * 0.5),
                             rng.uniform(-side * 0.5, side * 0.5)});
          }
          for (int i = 0; i < n; ++i) {
            Vec2 g = p.pos[i];
            for (int tries = 0; tries < 20 && norm(g - p.pos[i]) < 2.0; ++tries) {
              g = {rng.uniform(-side * 0.5, side * 0.5),
                   rng.uniform(-side * 0.5, side * 0.5)};
            }
            p.goals.push_back(g);
          }
          break;
        }
      }
      if (tmpl.kind != TemplateKind::RandomGoals) {
        for (auto& q : p.pos) {
          q.x += rng.uniform(-jitter, jitter);
          q.y += rng.uniform(-jitter, jitter);
        }
      }
      if (separated(p.pos, min_dist)) {
        base_pos = p.pos;
        goals = p.goals;
        obstacles = p.obstacles;
        placed = true;
      }
    }
    if (!placed) {
      throw std::runtime_error(
          "generate: could not place agents without overlap in 100 attempts");
    }

    crowd.ids.resize(n);
    crowd.st.resize(n);
    RngStream speed_rng = RngStream::keyed(tmpl.rng_seed, kSpeedKey);
    for (int i = 0; i < n; ++i) {
      crowd.ids[i] = static_cast<AgentId>(i);
      double speed;
      auto it = params.per_agent.find(static_cast<AgentId>(i));
      if (kind != ModelKind::Lin && it != params.per_agent.end()) {
        speed = comfort_speed(kind, it->second);
      } else {
        speed = speed_rng.trunc_normal(kWalkSpeedMean, kWalkSpeedSd, 1.0, 2.0);
      }
      Vec2 dir = normalized_or_zero(goals[i] - base_pos[i]);
      crowd.st[i] = {base_pos[i], dir * speed};
    }
  }

  out.scenario.obstacles = obstacles;
  for (size_t i = 0; i < crowd.size(); ++i) out.scenario.goals[crowd.ids[i]] = goals[i];

  // Bounds wrap everything the run can touch.
  double xmin = 1e18, ymin = 1e18, xmax = -1e18, ymax = -1e18;
  auto include = [&](Vec2 q) {
    xmin = std::min(xmin, q.x);
    ymin = std::min(ymin, q.y);
    xmax = std::max(xmax, q.x);
    ymax = std::max(ymax, q.y);
  };
  for (size_t i = 0; i < crowd.size(); ++i) {
    include(crowd.st[i].pos);
    include(goals[i]);
  }
  for (const Segment& seg : obstacles) {
    include(seg.a);
    include(seg.b);
  }
  out.scenario.bounds = {xmin - 2.0, ymin - 2.0, xmax + 2.0, ymax + 2.0};
  out.scenario.validate();

  std::vector<AgentId> ids = crowd.ids;
  DenseParams dp;
  dp.kind = kind;
  {
    auto defs = param_defs(kind);
    ParamRecord means{};
    for (size_t d = 0; d < defs.size(); ++d) means[d] = defs[d].mean;
    for (AgentId id : ids) {
      auto it = params.per_agent.find(id);
      ParamRecord row = it != params.per_agent.end() ? it->second : means;
      for (size_t d = 0; d < defs.size(); ++d) {
        row[d] = std::clamp(row[d], defs[d].lo, defs[d].hi);
      }
      dp.rows.push_back(row);
    }
  }

  out.ground_truth.source_tag = SourceTag::GroundTruth;
  out.ground_truth.frame_rate = 1.0 / dt;
  auto emit = [&](int64_t frame, const CrowdState& c) {
    for (size_t i = 0; i < c.size(); ++i) {
      out.ground_truth.records.push_back({frame, c.ids[i], c.st[i].pos.x,
                                          c.st[i].pos.y, c.st[i].vel.x,
                                          c.st[i].vel.y, true});
    }
  };

  StepWorkspace ws;
  CrowdState next;
  emit(0, crowd);
  for (int f = 1; f < frames; ++f) {
    step_crowd(kind, crowd, goals, dp, out.scenario, ModelConstants{}, ws, next);
    std::swap(crowd, next);
    emit(f, crowd);
  }
  out.ground_truth.validate();
  return out;
}

TrajectoryDataset corrupt(const TrajectoryDataset& gt, double observation_sigma,
                          double dropout_prob, uint64_t rng_seed) {
  if (observation_sigma < 0.0) {
    throw std::invalid_argument("corrupt: sigma must be >= 0");
  }
  if (dropout_prob < 0.0 || dropout_prob >= 1.0) {
    throw std::invalid_argument("corrupt: dropout_prob must lie in [0, 1)");
  }
  TrajectoryDataset out;
  out.frame_rate = gt.frame_rate;
  out.source_tag = SourceTag::Observation;
  for (const TrajRecord& rec : gt.records) {
    uint64_t f = static_cast<uint64_t>(rec.frame);
    uint64_t a = static_cast<uint64_t>(static_cast<uint32_t>(rec.agent_id));
    if (dropout_prob > 0.0) {
      RngStream drop = RngStream::keyed(rng_seed, kDropKey, f, a);
      if (drop.uniform() < dropout_prob) continue;
    }
    TrajRecord o = rec;
    o.vx = 0.0;
    o.vy = 0.0;
    o.has_velocity = false;  // measurements are positions
    if (observation_sigma > 0.0) {
      RngStream noise = RngStream::keyed(rng_seed, kNoiseKey, f, a);
      o.x += noise.normal(0.0, observation_sigma);
      o.y += noise.normal(0.0, observation_sigma);
    }
    out.records.push_back(o);
  }
  out.sort_records();
  return out;
}

TrajectoryDataset occlude_bursts(const TrajectoryDataset& ds, int episodes,
                                 int min_frames, int max_frames, uint64_t rng_seed) {
  if (episodes < 0) throw std::invalid_argument("occlude_bursts: episodes must be >= 0");
  if (min_frames < 1 || max_frames < min_frames) {
    throw std::invalid_argument("occlude_bursts: need 1 <= min_frames <= max_frames");
  }
  if (episodes == 0 || ds.empty()) return ds;

  const int64_t first = ds.first_frame();
  const int64_t last = ds.last_frame();
  std::map<AgentId, std::vector<std::pair<int64_t, int64_t>>> hidden;
  for (AgentId id : ds.agent_ids()) {
    auto& spans = hidden[id];
    const uint64_t a = static_cast<uint64_t>(static_cast<uint32_t>(id));
    for (int e = 0; e < episodes; ++e) {
      RngStream rng = RngStream::keyed(rng_seed, kOcclusionKey, a,
                                       static_cast<uint64_t>(e));
      const int64_t len =
          min_frames + static_cast<int64_t>(rng.next_u64() %
                                            static_cast<uint64_t>(max_frames - min_frames + 1));
      const int64_t span = last - first + 1 - len;
      const int64_t start =
          span <= 0 ? first
                    : first + static_cast<int64_t>(rng.next_u64() %
                                                   static_cast<uint64_t>(span + 1));
      spans.emplace_back(start, start + len);  // [start, end)
    }
  }

  TrajectoryDataset out;
  out.frame_rate = ds.frame_rate;
  out.source_tag = SourceTag::Observation;
  for (const TrajRecord& rec : ds.records) {
    bool drop = false;
    for (const auto& [s, e] : hidden.at(rec.agent_id)) {
      if (rec.frame >= s && rec.frame < e) {
        drop = true;
        break;
      }
    }
    if (!drop) out.records.push_back(rec);
  }
  return out;
}

ModelParams draw_benchmark_params(ModelKind kind, std::span<const AgentId> ids,
                                  uint64_t seed) {
  ModelParams out;
  out.kind = kind;
  if (kind == ModelKind::Lin) return out;
  for (AgentId id : ids) {
    RngStream rng =
        RngStream::keyed(seed, kParamKey, static_cast<uint64_t>(static_cast<uint32_t>(id)));
    ParamRecord r{};
    double radius = rng.uniform(0.2, 0.35);
    double comfort = rng.trunc_normal(kWalkSpeedMean, kWalkSpeedSd, 1.0, 2.0);
    if (kind == ModelKind::Rvo) {
      r[pix::kRvoComfort] = comfort;
      r[pix::kRvoNeighborDist] = rng.uniform(5.0, 15.0);
      r[pix::kRvoRadius] = radius;
      r[pix::kRvoAgentHorizon] = rng.uniform(1.0, 3.0);
      r[pix::kRvoObstacleHorizon] = rng.uniform(1.0, 3.0);
    } else {
      r[pix::kBoidsRadius] = radius;
      r[pix::kBoidsComfort] = comfort;
    }
    out.per_agent[id] = r;
  }
  return out;
}

std::string provenance_to_json(const Provenance& p) {
  nlohmann::json j;
  j["model"] = to_string(p.model);
  j["seed"] = p.seed;
  nlohmann::json params = nlohmann::json::object();
  auto defs = param_defs(p.params.kind);
  for (const auto& [id, row] : p.params.per_agent) {
    nlohmann::json rec = nlohmann::json::object();
    for (size_t d = 0; d < defs.size(); ++d) rec[defs[d].name] = row[d];
    params[std::to_string(id)] = rec;
  }
  j["params"] = params;
  return j.dump(2) + "\n";
}

Provenance provenance_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Provenance p;
  p.model = model_kind_from_string(j.at("model").get<std::string>());
  p.seed = j.at("seed").get<uint64_t>();
  p.params.kind = p.model;
  auto defs = param_defs(p.model);
  for (const auto& [key, rec] : j.at("params").items()) {
    ParamRecord row{};
    for (size_t d = 0; d < defs.size(); ++d) {
      row[d] = rec.at(defs[d].name).get<double>();
    }
    p.params.per_agent[static_cast<AgentId>(std::stol(key))] = row;
  }
  return p;
}

}  // namespace crowdtrack
