#include "crowdtrack/core/scenario.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace crowdtrack {

using nlohmann::json;

Vec2 closest_point_on_segment(const Segment& s, Vec2 p) {
  Vec2 d = s.b - s.a;
  double len2 = norm_sq(d);
  if (len2 <= 0.0) return s.a;
  double t = dot(p - s.a, d) / len2;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return s.a + d * t;
}

void Scenario::validate() const {
  if (dt <= 0.0) throw std::invalid_argument("scenario: dt must be > 0");
  if (bounds[0] >= bounds[2] || bounds[1] >= bounds[3]) {
    throw std::invalid_argument("scenario: bounds must satisfy min < max per axis");
  }
  for (size_t i = 0; i < obstacles.size(); ++i) {
    if (!contains(obstacles[i].a) || !contains(obstacles[i].b)) {
      throw std::invalid_argument("scenario: obstacle " + std::to_string(i) +
                                  " endpoint outside bounds");
    }
  }
  for (const auto& [id, g] : goals) {
    if (!is_finite(g)) {
      throw std::invalid_argument("scenario: non-finite goal for agent " +
                                  std::to_string(id));
    }
  }
}

bool Scenario::contains(Vec2 p) const {
  return p.x >= bounds[0] && p.y >= bounds[1] && p.x <= bounds[2] && p.y <= bounds[3];
}

std::string scenario_to_json(const Scenario& sc) {
  json j;
  j["dt"] = sc.dt;
  j["bounds"] = sc.bounds;
  json obs = json::array();
  for (const Segment& s : sc.obstacles) {
    obs.push_back({s.a.x, s.a.y, s.b.x, s.b.y});
  }
  j["obstacles"] = obs;
  json goals = json::object();
  for (const auto& [id, g] : sc.goals) {
    goals[std::to_string(id)] = {g.x, g.y};
  }
  j["goals"] = goals;
  return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario json: ") + e.what());
  }
  Scenario sc;
  try {
    sc.dt = j.at("dt").get<double>();
    sc.bounds = j.at("bounds").get<std::array<double, 4>>();
    for (const auto& row : j.at("obstacles")) {
      auto v = row.get<std::array<double, 4>>();
      sc.obstacles.push_back({{v[0], v[1]}, {v[2], v[3]}});
    }
    for (const auto& [key, val] : j.at("goals").items()) {
      auto g = val.get<std::array<double, 2>>();
      sc.goals[static_cast<AgentId>(std::stol(key))] = {g[0], g[1]};
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario json: ") + e.what());
  }
  sc.validate();
  return sc;
}

Scenario read_scenario_json(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open scenario json: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return scenario_from_json(ss.str());
}

void write_scenario_json(const Scenario& sc, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write scenario json: " + path);
  f << scenario_to_json(sc);
}

}  // namespace crowdtrack
