#include "crowdtrack/track/particles.hpp"

#include <cmath>
#include <stdexcept>

#include "crowdtrack/kernels/kernels.hpp"

namespace crowdtrack {

void NoiseModel::validate() const {
  if (process_sigma < 0.0 || observation_sigma < 0.0) {
    throw std::invalid_argument("noise model: sigmas must be >= 0");
  }
}

void ParticleSet::init_at(const AgentState& s, size_t n) {
  px.assign(n, s.pos.x);
  py.assign(n, s.pos.y);
  vx.assign(n, s.vel.x);
  vy.assign(n, s.vel.y);
  set_uniform_weights_n(n);
}

void ParticleSet::set_uniform_weights() { set_uniform_weights_n(size()); }

double ParticleSet::weight_sum() const {
  return kernels::active().sum(w.data(), w.size());
}

bool ParticleSet::normalize() {
  double s = weight_sum();
  if (!(s > 0.0) || !std::isfinite(s)) {
    set_uniform_weights();
    return false;
  }
  kernels::active().scale(w.data(), w.size(), 1.0 / s);
  return true;
}

void pf_propagate(ParticleSet& set, const FrozenAgentPrior& prior,
                  const NoiseModel& noise, RngStream& rng) {
  noise.validate();
  const size_t n = set.size();
  const double inv_dt = 1.0 / prior.dt;
  const double v_cap = prior.constants->v_cap;
  for (size_t i = 0; i < n; ++i) {
    AgentState out = prior(set.particle(i));
    out.pos.x += rng.normal(0.0, noise.process_sigma);
    out.pos.y += rng.normal(0.0, noise.process_sigma);
    Vec2 vel = clamped_norm((out.pos - Vec2{set.px[i], set.py[i]}) * inv_dt, v_cap);
    set.px[i] = out.pos.x;
    set.py[i] = out.pos.y;
    set.vx[i] = vel.x;
    set.vy[i] = vel.y;
  }
}

bool pf_reweight(ParticleSet& set, Vec2 obs, double observation_sigma) {
  const size_t n = set.size();
  if (n == 0) return false;
  const auto& K = kernels::active();

  auto& dx = set.scratch_a_;
  auto& dy = set.scratch_b_;
  auto& d2 = set.scratch_c_;
  dx.resize(n);
  dy.resize(n);
  d2.resize(n);
  for (size_t i = 0; i < n; ++i) {
    dx[i] = set.px[i] - obs.x;
    dy[i] = set.py[i] - obs.y;
  }
  K.squared_norms(dx.data(), dy.data(), d2.data(), n);
  double min_d2 = K.min_value(d2.data(), n);

  if (observation_sigma <= 0.0) {
    // Delta likelihood: only exact hits survive.
    if (min_d2 > 0.0) {
      set.set_uniform_weights();
      return false;
    }
    for (size_t i = 0; i < n; ++i) {
      if (d2[i] != 0.0) set.w[i] = 0.0;
    }
    return set.normalize();
  }

  const double inv2s2 = 1.0 / (2.0 * observation_sigma * observation_sigma);
  // The shift cancels in the normalized posterior; if even the closest
  // particle's unshifted exponent underflows, the observation is implausibly
  // far from the entire cloud.
  if (min_d2 * inv2s2 > 700.0) {
    set.set_uniform_weights();
    return false;
  }
  K.exp_neg_scaled(d2.data(), min_d2, inv2s2, set.w.data(), n);
  return set.normalize();
}

void pf_resample(ParticleSet& set, size_t target, RngStream& rng) {
  const size_t n = set.size();
  if (n == 0 || target == 0) {
    throw std::invalid_argument("resample: empty set or zero target");
  }
  auto& npx = set.scratch_a_;
  auto& npy = set.scratch_b_;
  auto& nvx = set.scratch_c_;
  std::vector<double> nvy(target);
  npx.resize(target);
  npy.resize(target);
  nvx.resize(target);

  // Systematic: one uniform offset, stratified positions u_j = (j + u0) / T.
  const double u0 = rng.uniform();
  size_t i = 0;
  double cum = set.w[0];
  for (size_t j = 0; j < target; ++j) {
    double u = (static_cast<double>(j) + u0) / static_cast<double>(target);
    while (cum < u && i + 1 < n) {
      ++i;
      cum += set.w[i];
    }
    npx[j] = set.px[i];
    npy[j] = set.py[i];
    nvx[j] = set.vx[i];
    nvy[j] = set.vy[i];
  }
  set.px.assign(npx.begin(), npx.end());
  set.py.assign(npy.begin(), npy.end());
  set.vx.assign(nvx.begin(), nvx.end());
  set.vy = std::move(nvy);
  set.set_uniform_weights_n(target);
}

AgentState pf_estimate(const ParticleSet& set) {
  const auto& K = kernels::active();
  AgentState s;
  K.weighted_sum2(set.px.data(), set.py.data(), set.w.data(), set.size(), &s.pos.x,
                  &s.pos.y);
  K.weighted_sum2(set.vx.data(), set.vy.data(), set.w.data(), set.size(), &s.vel.x,
                  &s.vel.y);
  return s;
}

}  // namespace crowdtrack
