#include "crowdtrack/track/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crowdtrack {

void ConfidenceConfig::validate() const {
  if (v_cap <= 0.0 || d_max <= 0.0) {
    throw std::invalid_argument("confidence: v_cap and d_max must be positive");
  }
  if (occlusion_penalty < 0.0 || occlusion_penalty > 1.0) {
    throw std::invalid_argument("confidence: occlusion_penalty must lie in [0,1]");
  }
  if (n_min < 1 || n_max < n_min) {
    throw std::invalid_argument("confidence: need 1 <= n_min <= n_max");
  }
}

namespace {
double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }
}  // namespace

Confidence compute_confidence(Vec2 est_first, Vec2 est_prev, Vec2 est_now,
                              Vec2 predicted, int span, double dt, bool occluded,
                              const ConfidenceConfig& cfg) {
  Confidence c;
  const double step_scale = cfg.v_cap * dt;
  const double a = norm(est_now - est_prev);
  const double b = norm(est_now - est_first);
  const double total_scale = step_scale * std::max(span, 1);
  c.propagation = clamp01(1.0 - a / step_scale) * clamp01(1.0 - b / total_scale);
  if (occluded) c.propagation *= cfg.occlusion_penalty;
  c.motion_model = clamp01(1.0 - norm(predicted - est_now) / cfg.d_max);
  c.combined = c.propagation * c.motion_model;
  return c;
}

int adapt_particle_count(const Confidence& conf, const ConfidenceConfig& cfg) {
  double combined = clamp01(conf.combined);
  double n = std::round(static_cast<double>(cfg.n_max) -
                        combined * static_cast<double>(cfg.n_max - cfg.n_min));
  return std::clamp(static_cast<int>(n), cfg.n_min, cfg.n_max);
}

}  // namespace crowdtrack
