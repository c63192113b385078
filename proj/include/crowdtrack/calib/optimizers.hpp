#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "crowdtrack/core/rng.hpp"
#include "crowdtrack/models/model_params.hpp"

namespace crowdtrack {

enum class OptimMethod : uint8_t { Greedy = 0, SimulatedAnnealing = 1, Genetic = 2 };

const char* to_string(OptimMethod method);
OptimMethod optim_method_from_string(const std::string& name);

// Group index order for the genetic per-group knobs: 0 = Best, 1 = Middle,
// 2 = Worst.
struct OptimizerSpec {
  OptimMethod method = OptimMethod::Genetic;
  int stagnation_k = 20;  // K: stop after this many consecutive stagnant steps
  uint64_t rng_seed = 1;

  // Genetic-only knobs.
  int pool_size = 30;
  std::array<double, 3> group_fractions{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  std::array<double, 3> alpha{0.1, 0.4, 0.8};  // P(parameter changes at all)
  std::array<double, 3> beta{0.5, 0.5, 0.5};   // given change: P(crossover)
  std::array<double, 3> gamma{0.5, 0.5, 0.5};  // given mutation: P(base dist)

  // Hard cap on cost evaluations for equal-budget comparisons; 0 = unlimited.
  int64_t max_evaluations = 0;

  // Throws std::invalid_argument on K < 1, probabilities outside [0,1], or
  // pool_size < 3 when method is Genetic.
  void validate() const;
};

// One search dimension. speed_prior switches the base distribution from
// uniform over [lo, hi] to a truncated normal around typical walking speed.
struct ParamDim {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  double mean = 0.5;
  bool speed_prior = false;
};

struct ParamSpace {
  std::vector<ParamDim> dims;

  size_t size() const { return dims.size(); }
  double sample_dim(size_t d, RngStream& rng) const;
  std::vector<double> mean_point() const;
  std::vector<double> sample_point(RngStream& rng) const;
  void clamp_point(std::vector<double>& point) const;
};

using CostFn = std::function<double(const std::vector<double>&)>;
// Called once per cost evaluation with (eval_index, cost, point).
using EvalRecorder =
    std::function<void(int64_t, double, const std::vector<double>&)>;

struct OptimResult {
  std::vector<double> best_point;
  double best_cost = std::numeric_limits<double>::infinity();
  int64_t evaluations = 0;
};

// Metropolis-style move rule: improving moves always pass; otherwise pass when
// u < exp((e_old - e_new) / temperature). Exposed for direct unit testing.
bool sa_accept(double e_old, double e_new, double temperature, double u);

// warm_start points (clamped into range) seed the search: the first one
// replaces the mean start for greedy/annealing, and they occupy the leading
// pool slots for the genetic method.
OptimResult run_greedy(const ParamSpace& space, const CostFn& cost,
                       const OptimizerSpec& spec,
                       std::span<const std::vector<double>> warm_start = {},
                       const EvalRecorder& recorder = {});
OptimResult run_simulated_annealing(const ParamSpace& space, const CostFn& cost,
                                    const OptimizerSpec& spec,
                                    std::span<const std::vector<double>> warm_start = {},
                                    const EvalRecorder& recorder = {});
OptimResult run_genetic(const ParamSpace& space, const CostFn& cost,
                        const OptimizerSpec& spec,
                        std::span<const std::vector<double>> warm_start = {},
                        const EvalRecorder& recorder = {});
OptimResult run_optimizer(const ParamSpace& space, const CostFn& cost,
                          const OptimizerSpec& spec,
                          std::span<const std::vector<double>> warm_start = {},
                          const EvalRecorder& recorder = {});

}  // namespace crowdtrack
