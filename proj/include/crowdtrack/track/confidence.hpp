#pragma once

#include "crowdtrack/core/types.hpp"

namespace crowdtrack {

struct ConfidenceConfig {
  double v_cap = kDefaultVCap;     // plausible per-step drift scale [m/s]
  double d_max = 0.8;              // residual where mmr hits zero [m]
  double occlusion_penalty = 0.5;  // multiplies pr on unobserved frames
  int n_min = 20;
  int n_max = 200;

  // Throws std::invalid_argument on non-positive scales or inverted counts.
  void validate() const;
};

struct Confidence {
  double propagation = 1.0;   // pr: drift plausibility of the tracked state
  double motion_model = 1.0;  // mmr: prediction-vs-estimate agreement
  double combined = 1.0;      // pr * mmr
};

// pr = clamp(1 - step_drift/(v_cap*dt)) * clamp(1 - total_drift/(v_cap*dt*span)),
// where step_drift = |est_now - est_prev|, total_drift = |est_now - est_first|
// and span is the frame count between est_first and est_now; occluded frames
// scale pr by the occlusion penalty. mmr = clamp(1 - |predicted - est_now|/d_max).
Confidence compute_confidence(Vec2 est_first, Vec2 est_prev, Vec2 est_now,
                              Vec2 predicted, int span, double dt, bool occluded,
                              const ConfidenceConfig& cfg);

// n = round(n_max - combined * (n_max - n_min)), clamped to [n_min, n_max].
int adapt_particle_count(const Confidence& conf, const ConfidenceConfig& cfg);

}  // namespace crowdtrack
