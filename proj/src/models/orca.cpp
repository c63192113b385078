#include "crowdtrack/models/orca.hpp"

#include <cmath>

namespace crowdtrack {

namespace {

constexpr double kEps = 1e-10;

// Optimize along lines[i] subject to lines[0..i) and the speed disc.
// dir_opt: maximize progress along opt_v (a unit direction) instead of
// minimizing distance to opt_v. Returns false when infeasible.
bool lp1(std::span<const OrcaLine> lines, size_t i, double max_speed, Vec2 opt_v,
         bool dir_opt, Vec2& result) {
  const OrcaLine& li = lines[i];
  double dot_pd = dot(li.point, li.dir);
  double discriminant = dot_pd * dot_pd + max_speed * max_speed - norm_sq(li.point);
  if (discriminant < 0.0) return false;  // speed disc misses the line

  double sqrt_disc = std::sqrt(discriminant);
  double t_left = -dot_pd - sqrt_disc;
  double t_right = -dot_pd + sqrt_disc;

  for (size_t j = 0; j < i; ++j) {
    const OrcaLine& lj = lines[j];
    double denom = det(li.dir, lj.dir);
    double numer = det(lj.dir, li.point - lj.point);
    if (std::fabs(denom) <= kEps) {
      if (numer < 0.0) return false;  // parallel and fully excluded
      continue;
    }
    double t = numer / denom;
    if (denom >= 0.0) {
      t_right = t < t_right ? t : t_right;
    } else {
      t_left = t > t_left ? t : t_left;
    }
    if (t_left > t_right) return false;
  }

  double t;
  if (dir_opt) {
    t = dot(opt_v, li.dir) > 0.0 ? t_right : t_left;
  } else {
    t = dot(li.dir, opt_v - li.point);
    t = t < t_left ? t_left : (t > t_right ? t_right : t);
  }
  result = li.point + t * li.dir;
  return true;
}

// Sequential LP over all lines; returns lines.size() on success or the index
// of the first constraint that could not be satisfied (result then holds the
// best velocity for the preceding constraints).
size_t lp2(std::span<const OrcaLine> lines, double max_speed, Vec2 opt_v, bool dir_opt,
           Vec2& result) {
  if (dir_opt) {
    result = opt_v * max_speed;  // opt_v is a unit direction
  } else if (norm_sq(opt_v) > max_speed * max_speed) {
    result = normalized_or_zero(opt_v) * max_speed;
  } else {
    result = opt_v;
  }
  for (size_t i = 0; i < lines.size(); ++i) {
    if (det(lines[i].dir, lines[i].point - result) > 0.0) {
      Vec2 saved = result;
      if (!lp1(lines, i, max_speed, opt_v, dir_opt, result)) {
        result = saved;
        return i;
      }
    }
  }
  return lines.size();
}

// Least-penetration fallback: starting at the first failed agent constraint,
// minimize the maximum violation of the remaining agent constraints while
// keeping obstacle constraints hard.
void lp3(std::span<const OrcaLine> lines, size_t obstacle_count, size_t begin,
         double max_speed, Vec2& result) {
  double distance = 0.0;
  std::vector<OrcaLine> proj;
  for (size_t i = begin; i < lines.size(); ++i) {
    if (det(lines[i].dir, lines[i].point - result) <= distance) continue;

    proj.assign(lines.begin(), lines.begin() + static_cast<ptrdiff_t>(obstacle_count));
    for (size_t j = obstacle_count; j < i; ++j) {
      OrcaLine line;
      double denom = det(lines[i].dir, lines[j].dir);
      if (std::fabs(denom) <= kEps) {
        if (dot(lines[i].dir, lines[j].dir) > 0.0) continue;  // same direction
        line.point = (lines[i].point + lines[j].point) * 0.5;
      } else {
        line.point = lines[i].point +
                     (det(lines[j].dir, lines[i].point - lines[j].point) / denom) *
                         lines[i].dir;
      }
      line.dir = normalized_or_zero(lines[j].dir - lines[i].dir);
      proj.push_back(line);
    }

    Vec2 saved = result;
    if (lp2(proj, max_speed, perp(lines[i].dir), /*dir_opt=*/true, result) <
        proj.size()) {
      // Rounding only; keep the previous (valid enough) result.
      result = saved;
    }
    distance = det(lines[i].dir, lines[i].point - result);
  }
}

}  // namespace

OrcaLine orca_line(Vec2 rel_pos, Vec2 rel_vel, double combined_r, double inv_horizon,
                   double inv_dt, Vec2 self_vel, double share) {
  double dist2 = norm_sq(rel_pos);
  double r2 = combined_r * combined_r;
  Vec2 dir, u;

  if (dist2 > r2) {
    // Not yet colliding: truncated velocity-obstacle cone.
    Vec2 w = rel_vel - inv_horizon * rel_pos;
    double w2 = norm_sq(w);
    double dot1 = dot(w, rel_pos);
    if (dot1 < 0.0 && dot1 * dot1 > r2 * w2) {
      // Closest to the cutoff disc.
      double w_len = std::sqrt(w2);
      Vec2 unit_w = w_len > 0.0 ? w / w_len : Vec2{1.0, 0.0};
      dir = {unit_w.y, -unit_w.x};
      u = (combined_r * inv_horizon - w_len) * unit_w;
    } else {
      // Closest to one of the cone legs.
      double leg = std::sqrt(dist2 - r2);
      if (det(rel_pos, w) > 0.0) {
        dir = Vec2{rel_pos.x * leg - rel_pos.y * combined_r,
                   rel_pos.x * combined_r + rel_pos.y * leg} /
              dist2;
      } else {
        dir = -Vec2{rel_pos.x * leg + rel_pos.y * combined_r,
                    -rel_pos.x * combined_r + rel_pos.y * leg} /
              dist2;
      }
      u = dot(rel_vel, dir) * dir - rel_vel;
    }
  } else {
    // Overlapping: push apart within one timestep.
    Vec2 w = rel_vel - inv_dt * rel_pos;
    double w_len = norm(w);
    Vec2 unit_w = w_len > 0.0 ? w / w_len : Vec2{1.0, 0.0};
    dir = {unit_w.y, -unit_w.x};
    u = (combined_r * inv_dt - w_len) * unit_w;
  }

  return {self_vel + share * u, dir};
}

Vec2 solve_orca(std::span<const OrcaLine> lines, size_t obstacle_count,
                double max_speed, Vec2 v_pref, bool* fully_feasible) {
  Vec2 result;
  size_t fail = lp2(lines, max_speed, v_pref, /*dir_opt=*/false, result);
  if (fully_feasible) *fully_feasible = fail == lines.size();
  if (fail < lines.size()) {
    lp3(lines, obstacle_count, fail, max_speed, result);
  }
  return result;
}

}  // namespace crowdtrack
