#include "crowdtrack/bench/suite.hpp"

#include <algorithm>
#include <array>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "crowdtrack/core/state_history.hpp"

namespace crowdtrack {

TrackerConfig benchmark_tracker_config() {
  TrackerConfig t;
  t.noise.process_sigma = 0.04;
  t.noise.observation_sigma = 0.12;  // slightly above the suite's real 0.1
  t.calibration.recalibrate_every = 30;
  t.calibration.live_spec.pool_size = 4;
  t.confidence.v_cap = 14.0;  // drift-implausibility scale, not a speed cap
  t.occlusion_onset_sigma = 0.5;
  return t;
}

SuiteCase make_suite_case(const TrackingSuiteConfig& cfg, int index) {
  if (index < 0 || index >= cfg.cases) {
    throw std::invalid_argument("suite: case index out of range");
  }
  SuiteCase c;
  c.seed = cfg.base_seed + static_cast<uint64_t>(index);

  ScenarioTemplate tmpl;
  tmpl.kind = cfg.tmpl;
  tmpl.agent_count = cfg.agents;
  tmpl.density = cfg.density;
  tmpl.rng_seed = c.seed;

  std::vector<AgentId> ids(static_cast<size_t>(cfg.agents));
  std::iota(ids.begin(), ids.end(), 0);
  const ModelParams params = draw_benchmark_params(cfg.generator, ids, c.seed);

  c.truth = generate(tmpl, cfg.generator, params, cfg.frames, cfg.dt);
  c.observations =
      corrupt(c.truth.ground_truth, cfg.observation_sigma, cfg.dropout, c.seed);
  if (cfg.occlusion_episodes > 0) {
    c.observations = occlude_bursts(c.observations, cfg.occlusion_episodes,
                                    cfg.occlusion_min_frames,
                                    cfg.occlusion_max_frames, c.seed);
  }
  return c;
}

TrackedRun run_tracking_case(const SuiteCase& c, const TrackerConfig& tracker,
                             const MatchConfig& match) {
  TrackedRun run;
  run.seed = c.seed;
  TrackOutput out = track(c.observations, c.truth.scenario, tracker);
  run.report = evaluate(c.truth.ground_truth, out.estimates, match);
  run.summary = out.summary;
  run.tracking_seconds =
      out.summary.steps_per_second > 0.0
          ? static_cast<double>(out.summary.frames_tracked) / out.summary.steps_per_second
          : 0.0;
  return run;
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty set");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<OptimizerBenchStat> run_optimizer_bench(const OptimizerBenchConfig& cfg) {
  if (cfg.seeds < 1 || cfg.agents < 1 || cfg.window_steps < 1 || cfg.budget < 1) {
    throw std::invalid_argument("optimizer bench: counts must be positive");
  }

  const std::array<OptimMethod, 3> methods{
      OptimMethod::Greedy, OptimMethod::SimulatedAnnealing, OptimMethod::Genetic};
  std::vector<OptimizerBenchStat> stats(methods.size());
  for (size_t m = 0; m < methods.size(); ++m) stats[m].method = methods[m];

  std::vector<AgentId> ids(static_cast<size_t>(cfg.agents));
  std::iota(ids.begin(), ids.end(), 0);
  const ModelConstants constants;

  for (int s = 0; s < cfg.seeds; ++s) {
    const uint64_t seed = cfg.base_seed + static_cast<uint64_t>(s);
    for (ModelKind kind : cfg.kinds) {
      ScenarioTemplate tmpl;
      tmpl.kind = TemplateKind::Crossing;
      tmpl.agent_count = cfg.agents;
      tmpl.density = DensityClass::Medium;
      tmpl.rng_seed = seed;
      const ModelParams params = draw_benchmark_params(kind, ids, seed);
      const SynthOutput truth = generate(tmpl, kind, params, cfg.window_steps + 1, cfg.dt);

      StateHistory window(cfg.window_steps, cfg.dt);
      for (int f = 0; f <= cfg.window_steps; ++f) {
        window.push(f, truth.ground_truth.frame_snapshot(f));
      }

      for (size_t m = 0; m < methods.size(); ++m) {
        OptimizerSpec spec;
        spec.method = methods[m];
        spec.max_evaluations = cfg.budget;
        // Stagnation must never fire before the budget does: equal budgets.
        spec.stagnation_k = static_cast<int>(cfg.budget);
        spec.rng_seed = seed;
        const ModelFit fit =
            optimize_params(kind, window, truth.scenario, constants, spec);
        stats[m].errors.push_back(fit.error);
      }
    }
  }

  for (OptimizerBenchStat& st : stats) {
    st.min = *std::min_element(st.errors.begin(), st.errors.end());
    st.max = *std::max_element(st.errors.begin(), st.errors.end());
    st.mean = std::accumulate(st.errors.begin(), st.errors.end(), 0.0) /
              static_cast<double>(st.errors.size());
    st.median = median_of(st.errors);
  }
  return stats;
}

std::string optimizer_bench_table(std::span<const OptimizerBenchStat> stats) {
  std::ostringstream os;
  os << std::left << std::setw(8) << "method" << std::right << std::setw(12) << "min"
     << std::setw(12) << "mean" << std::setw(12) << "max" << std::setw(12) << "median"
     << '\n';
  os << std::fixed << std::setprecision(4);
  for (const OptimizerBenchStat& st : stats) {
    os << std::left << std::setw(8) << to_string(st.method) << std::right
       << std::setw(12) << st.min << std::setw(12) << st.mean << std::setw(12)
       << st.max << std::setw(12) << st.median << '\n';
  }
  return os.str();
}

std::string optimizer_bench_csv(std::span<const OptimizerBenchStat> stats) {
  std::ostringstream os;
  os.precision(9);
  os << "method,min,mean,max,median\n";
  for (const OptimizerBenchStat& st : stats) {
    os << to_string(st.method) << ',' << st.min << ',' << st.mean << ',' << st.max
       << ',' << st.median << '\n';
  }
  return os.str();
}

}  // namespace crowdtrack
