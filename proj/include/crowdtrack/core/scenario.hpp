#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "crowdtrack/core/types.hpp"

namespace crowdtrack {

struct Segment {
  Vec2 a;
  Vec2 b;
};

Vec2 closest_point_on_segment(const Segment& s, Vec2 p);

// Static world description shared by generation, calibration and tracking.
// bounds = {xmin, ymin, xmax, ymax}.
struct Scenario {
  double dt = 0.04;
  std::array<double, 4> bounds{-10.0, -10.0, 10.0, 10.0};
  std::vector<Segment> obstacles;
  std::map<AgentId, Vec2> goals;

  // Throws std::invalid_argument on dt <= 0, inverted bounds, or obstacle
  // endpoints outside bounds.
  void validate() const;
  bool contains(Vec2 p) const;
};

// JSON keys: dt, bounds (4 numbers), obstacles (list of [ax,ay,bx,by]),
// goals (object: agent id string -> [x,y]).
Scenario read_scenario_json(const std::string& path);
void write_scenario_json(const Scenario& sc, const std::string& path);
std::string scenario_to_json(const Scenario& sc);
Scenario scenario_from_json(const std::string& text);

}  // namespace crowdtrack
