#pragma once

#include <span>
#include <vector>

#include "crowdtrack/core/vec2.hpp"

namespace crowdtrack {

// Half-plane constraint on velocity space. Feasible side is the left of the
// directed line: det(dir, v - point) >= 0.
struct OrcaLine {
  Vec2 point;
  Vec2 dir;
};

// Constraint induced on `self` by a neighbor (or a static obstacle point).
//   rel_pos      = other position - self position
//   rel_vel      = self velocity - other velocity
//   combined_r   = sum of body radii
//   inv_horizon  = 1 / time horizon
//   inv_dt       = 1 / simulation step (used when already overlapping)
//   self_vel     = current velocity of self
//   share        = fraction of the correction self takes (0.5 reciprocal,
//                  1.0 against static obstacles)
OrcaLine orca_line(Vec2 rel_pos, Vec2 rel_vel, double combined_r, double inv_horizon,
                   double inv_dt, Vec2 self_vel, double share);

// Velocity closest to v_pref subject to all half-planes and |v| <= max_speed.
// The first `obstacle_count` lines are treated as hard when the system is
// infeasible and the solver falls back to least penetration of the remaining
// (agent) constraints. fully_feasible reports whether the fallback ran.
Vec2 solve_orca(std::span<const OrcaLine> lines, size_t obstacle_count,
                double max_speed, Vec2 v_pref, bool* fully_feasible = nullptr);

}  // namespace crowdtrack
