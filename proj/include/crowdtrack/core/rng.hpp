#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace crowdtrack {

// SplitMix64 step. Fast, full-period over 2^64 seeds, good enough statistics
// for noise injection and stochastic search.
inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline uint64_t mix_key(uint64_t a, uint64_t b) {
  uint64_t s = a ^ (b * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull);
  return splitmix64(s);
}

// Deterministic keyed stream. Streams derived from the same (seed, keys...)
// tuple produce identical draws regardless of thread count or call order,
// which is what the reproducibility contracts lean on: every stochastic site
// derives a fresh stream keyed by content (seed, frame, agent, purpose).
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : state_(seed ^ 0x6a09e667f3bcc909ull) {}

  template <typename... Keys>
  static RngStream keyed(uint64_t seed, Keys... keys) {
    uint64_t s = seed ^ 0xbb67ae8584caa73bull;
    ((s = mix_key(s, static_cast<uint64_t>(keys))), ...);
    return RngStream(s);
  }

  uint64_t next_u64() { return splitmix64(state_); }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; the spare value keeps consecutive draws cheap and the stream
  // fully deterministic (no rejection).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(-u1));  // log(1-u1), u1 in [0,1)
    double a = 2.0 * 3.141592653589793238462643 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mu, double sd) { return mu + sd * normal(); }

  // Rejection with a bounded retry count so the draw stays deterministic and
  // total; the fallback clamp only triggers for pathological (mu, sd) vs range.
  double trunc_normal(double mu, double sd, double lo, double hi) {
    for (int i = 0; i < 64; ++i) {
      double v = normal(mu, sd);
      if (v >= lo && v <= hi) return v;
    }
    return std::clamp(mu, lo, hi);
  }

 private:
  uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace crowdtrack
