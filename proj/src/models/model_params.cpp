#include "crowdtrack/models/model_params.hpp"

#include <stdexcept>

namespace crowdtrack {

namespace {

constexpr ParamDef kBoidsDefs[] = {
    {"radius", 0.1, 1.0, 0.3, false},
    {"comfort_speed", 1.0, 2.0, 1.5, true},
};

constexpr ParamDef kSfDefs[] = {
    {"radius", 0.1, 1.0, 0.3, false},
    {"comfort_speed", 1.0, 2.0, 1.5, true},
};

constexpr ParamDef kRvoDefs[] = {
    {"comfort_speed", 1.0, 2.0, 1.5, true},
    {"neighbor_distance", 2.0, 20.0, 11.0, false},
    {"radius", 0.2, 0.8, 0.5, false},
    {"agent_time_horizon", 0.1, 5.0, 2.0, false},
    {"obstacle_time_horizon", 0.1, 5.0, 2.0, false},
};

}  // namespace

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Lin: return "lin";
    case ModelKind::Boids: return "boids";
    case ModelKind::SocialForces: return "social_forces";
    case ModelKind::Rvo: return "rvo";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "lin") return ModelKind::Lin;
  if (name == "boids") return ModelKind::Boids;
  if (name == "social_forces" || name == "sf") return ModelKind::SocialForces;
  if (name == "rvo") return ModelKind::Rvo;
  throw std::invalid_argument("unknown model kind '" + name + "'");
}

std::span<const ParamDef> param_defs(ModelKind kind) {
  switch (kind) {
    case ModelKind::Lin: return {};
    case ModelKind::Boids: return kBoidsDefs;
    case ModelKind::SocialForces: return kSfDefs;
    case ModelKind::Rvo: return kRvoDefs;
  }
  return {};
}

void ModelParams::validate(std::span<const AgentId> agents) const {
  auto defs = param_defs(kind);
  if (defs.empty()) return;
  for (AgentId id : agents) {
    auto it = per_agent.find(id);
    if (it == per_agent.end()) {
      throw std::invalid_argument(std::string("model ") + to_string(kind) +
                                  ": missing parameters for agent " + std::to_string(id));
    }
    for (size_t j = 0; j < defs.size(); ++j) {
      double v = it->second[j];
      if (!(v >= defs[j].lo && v <= defs[j].hi)) {
        throw std::invalid_argument(std::string("model ") + to_string(kind) + ": agent " +
                                    std::to_string(id) + " parameter " + defs[j].name +
                                    " = " + std::to_string(v) + " outside [" +
                                    std::to_string(defs[j].lo) + ", " +
                                    std::to_string(defs[j].hi) + "]");
      }
    }
  }
}

ModelParams ModelParams::means_for(ModelKind kind, std::span<const AgentId> agents) {
  ModelParams p;
  p.kind = kind;
  auto defs = param_defs(kind);
  if (defs.empty()) return p;
  ParamRecord rec{};
  for (size_t j = 0; j < defs.size(); ++j) rec[j] = defs[j].mean;
  for (AgentId id : agents) p.per_agent[id] = rec;
  return p;
}

}  // namespace crowdtrack
