#pragma once

#include <cstdint>
#include <vector>

#include "crowdtrack/core/rng.hpp"
#include "crowdtrack/core/types.hpp"
#include "crowdtrack/models/motion_model.hpp"

namespace crowdtrack {

struct NoiseModel {
  double process_sigma = 0.05;     // Q_t std on position [m]
  double observation_sigma = 0.4;  // R_t std assumed by the filter [m]

  // Throws std::invalid_argument on negative sigmas.
  void validate() const;
};

// Weighted state hypotheses for one tracked agent, stored column-wise so the
// distance/weight loops run through the data-parallel kernel table.
struct ParticleSet {
  AgentId agent_id = 0;
  std::vector<double> px, py, vx, vy, w;

  size_t size() const { return w.size(); }
  AgentState particle(size_t i) const {
    return {{px[i], py[i]}, {vx[i], vy[i]}};
  }

  // n copies of s, uniform weights.
  void init_at(const AgentState& s, size_t n);
  double weight_sum() const;
  void set_uniform_weights();
  // Scales weights to sum 1; degenerate (non-positive or non-finite) totals
  // reset to uniform and return false.
  bool normalize();

 private:
  friend bool pf_reweight(ParticleSet&, Vec2, double);
  friend void pf_resample(ParticleSet&, size_t, RngStream&);
  void set_uniform_weights_n(size_t n) {
    w.assign(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
  }
  std::vector<double> scratch_a_, scratch_b_, scratch_c_;
};

// Step every particle through the frozen prior, add Gaussian process noise to
// the position, and set velocity from the particle's own displacement over
// prior.dt (clamped to the model v_cap). Zero sigma moves every particle
// exactly by the model prediction.
void pf_propagate(ParticleSet& set, const FrozenAgentPrior& prior,
                  const NoiseModel& noise, RngStream& rng);

// Multiply weights by the Gaussian position likelihood of obs (max-shifted
// for stability) and renormalize. Returns false on the lost-track path: the
// best particle's raw log-likelihood underflows (exponent beyond ~700) or the
// reweighted mass degenerates — weights reset to uniform.
bool pf_reweight(ParticleSet& set, Vec2 obs, double observation_sigma);

// Systematic resampling to exactly `target` particles; weights become
// uniform. Requires normalized input weights.
void pf_resample(ParticleSet& set, size_t target, RngStream& rng);

// Weighted posterior mean of the particle states.
AgentState pf_estimate(const ParticleSet& set);

}  // namespace crowdtrack
