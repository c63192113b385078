#include "crowdtrack/calib/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace crowdtrack {

const char* to_string(OptimMethod method) {
  switch (method) {
    case OptimMethod::Greedy: return "greedy";
    case OptimMethod::SimulatedAnnealing: return "sa";
    case OptimMethod::Genetic: return "ga";
  }
  return "?";
}

OptimMethod optim_method_from_string(const std::string& name) {
  if (name == "greedy") return OptimMethod::Greedy;
  if (name == "sa" || name == "annealing") return OptimMethod::SimulatedAnnealing;
  if (name == "ga" || name == "genetic") return OptimMethod::Genetic;
  throw std::invalid_argument("unknown optimizer method: " + name);
}

void OptimizerSpec::validate() const {
  if (stagnation_k < 1) throw std::invalid_argument("optimizer: K must be >= 1");
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  for (int g = 0; g < 3; ++g) {
    if (!prob(alpha[g]) || !prob(beta[g]) || !prob(gamma[g]) ||
        !prob(group_fractions[g])) {
      throw std::invalid_argument("optimizer: probabilities must lie in [0,1]");
    }
  }
  if (method == OptimMethod::Genetic && pool_size < 3) {
    throw std::invalid_argument("optimizer: genetic pool size must be >= 3");
  }
  if (max_evaluations < 0) {
    throw std::invalid_argument("optimizer: max_evaluations must be >= 0");
  }
}

double ParamSpace::sample_dim(size_t d, RngStream& rng) const {
  const ParamDim& pd = dims[d];
  if (pd.speed_prior) {
    return rng.trunc_normal(kWalkSpeedMean, kWalkSpeedSd, pd.lo, pd.hi);
  }
  return rng.uniform(pd.lo, pd.hi);
}

std::vector<double> ParamSpace::mean_point() const {
  std::vector<double> p(dims.size());
  for (size_t d = 0; d < dims.size(); ++d) p[d] = dims[d].mean;
  return p;
}

std::vector<double> ParamSpace::sample_point(RngStream& rng) const {
  std::vector<double> p(dims.size());
  for (size_t d = 0; d < dims.size(); ++d) p[d] = sample_dim(d, rng);
  return p;
}

void ParamSpace::clamp_point(std::vector<double>& point) const {
  for (size_t d = 0; d < dims.size() && d < point.size(); ++d) {
    point[d] = std::clamp(point[d], dims[d].lo, dims[d].hi);
  }
}

bool sa_accept(double e_old, double e_new, double temperature, double u) {
  if (e_new < e_old) return true;
  if (temperature <= 0.0) return false;
  return u < std::exp((e_old - e_new) / temperature);
}

namespace {

// Counts every cost invocation and forwards each to the recorder, so budget
// accounting is exact by construction.
struct Evaluator {
  const CostFn& fn;
  const EvalRecorder& recorder;
  int64_t budget;  // 0 = unlimited
  int64_t count = 0;

  bool exhausted() const { return budget > 0 && count >= budget; }

  double operator()(const std::vector<double>& p) {
    double c = fn(p);
    if (recorder) recorder(count, c, p);
    ++count;
    return c;
  }
};

std::vector<double> start_point(const ParamSpace& space,
                                std::span<const std::vector<double>> warm_start) {
  if (!warm_start.empty()) {
    std::vector<double> p = warm_start.front();
    p.resize(space.size(), 0.0);
    space.clamp_point(p);
    return p;
  }
  return space.mean_point();
}

// Resample one uniformly chosen dimension from its base distribution.
void perturb_one(const ParamSpace& space, RngStream& rng, std::vector<double>& p) {
  size_t d = static_cast<size_t>(rng.next_u64() % space.size());
  p[d] = space.sample_dim(d, rng);
}

}  // namespace

OptimResult run_greedy(const ParamSpace& space, const CostFn& cost,
                       const OptimizerSpec& spec,
                       std::span<const std::vector<double>> warm_start,
                       const EvalRecorder& recorder) {
  spec.validate();
  Evaluator eval{cost, recorder, spec.max_evaluations};
  RngStream rng = RngStream::keyed(spec.rng_seed, 0x6772656564ull);

  OptimResult r;
  r.best_point = start_point(space, warm_start);
  r.best_cost = eval(r.best_point);
  if (!space.dims.empty()) {
    const int kk = spec.stagnation_k;
    int k = 0;
    while (k < kk && !eval.exhausted()) {
      std::vector<double> cand = r.best_point;
      perturb_one(space, rng, cand);
      double c = eval(cand);
      if (c < r.best_cost) {
        r.best_point = std::move(cand);
        r.best_cost = c;
        k = 0;
      } else {
        ++k;
      }
    }
  }
  r.evaluations = eval.count;
  return r;
}

OptimResult run_simulated_annealing(const ParamSpace& space, const CostFn& cost,
                                    const OptimizerSpec& spec,
                                    std::span<const std::vector<double>> warm_start,
                                    const EvalRecorder& recorder) {
  spec.validate();
  Evaluator eval{cost, recorder, spec.max_evaluations};
  RngStream rng = RngStream::keyed(spec.rng_seed, 0x616e6e65616cull);

  std::vector<double> s = start_point(space, warm_start);
  double e = eval(s);
  OptimResult r;
  r.best_point = s;
  r.best_cost = e;
  if (!space.dims.empty()) {
    const int kk = spec.stagnation_k;
    int k = 0;  // consecutive iterations without a new optimum
    while (k < kk && !eval.exhausted()) {
      double temperature = static_cast<double>(kk - k) / static_cast<double>(kk);
      std::vector<double> cand = s;
      perturb_one(space, rng, cand);
      double e_new = eval(cand);
      bool improved = e_new < e;
      double u = improved ? 0.0 : rng.uniform();
      if (sa_accept(e, e_new, temperature, u)) {
        s = std::move(cand);
        e = e_new;
      }
      k = improved ? 0 : k + 1;
      if (e_new < r.best_cost) {
        r.best_point = s;  // just accepted: s == cand
        r.best_cost = e_new;
      }
    }
  }
  r.evaluations = eval.count;
  return r;
}

OptimResult run_genetic(const ParamSpace& space, const CostFn& cost,
                        const OptimizerSpec& spec,
                        std::span<const std::vector<double>> warm_start,
                        const EvalRecorder& recorder) {
  spec.validate();
  Evaluator eval{cost, recorder, spec.max_evaluations};
  RngStream rng = RngStream::keyed(spec.rng_seed, 0x67656e65ull);

  const size_t dims = space.size();
  const size_t n = static_cast<size_t>(spec.pool_size);

  // Seed pool: warm-start individuals lead, then the mean individual, then
  // fresh draws from the base distributions.
  std::vector<std::vector<double>> points;
  points.reserve(n);
  for (const auto& w : warm_start) {
    if (points.size() == n) break;
    std::vector<double> p = w;
    p.resize(dims, 0.0);
    space.clamp_point(p);
    points.push_back(std::move(p));
  }
  if (points.size() < n) points.push_back(space.mean_point());
  while (points.size() < n) points.push_back(space.sample_point(rng));

  OptimResult r;
  std::vector<double> costs;
  costs.reserve(n);
  for (const auto& p : points) {
    if (eval.exhausted()) break;
    double c = eval(p);
    costs.push_back(c);
    if (c < r.best_cost) {
      r.best_cost = c;
      r.best_point = p;
    }
  }
  points.resize(costs.size());  // individuals the budget never scored drop out

  const size_t m = points.size();
  if (m >= 1 && dims > 0) {
    const int kk = spec.stagnation_k;
    // Group sizes from the configured fractions; Best never empty.
    size_t nb = std::clamp<size_t>(
        static_cast<size_t>(std::llround(spec.group_fractions[0] * static_cast<double>(m))),
        1, m);
    size_t nm = std::min<size_t>(
        static_cast<size_t>(std::llround(spec.group_fractions[1] * static_cast<double>(m))),
        m - nb);

    std::vector<size_t> order(m);
    std::vector<int> group(m);
    std::vector<double> fit_mean(dims), fit_sd(dims);
    std::vector<double> cand;

    int stagnant = 0;
    bool budget_hit = eval.exhausted();
    while (stagnant < kk && !budget_hit) {
      std::iota(order.begin(), order.end(), size_t{0});
      std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return costs[a] != costs[b] ? costs[a] < costs[b] : a < b;
      });
      for (size_t j = 0; j < m; ++j) {
        group[order[j]] = j < nb ? 0 : (j < nb + nm ? 1 : 2);
      }

      // Snapshot of the Best group: crossover donors and the per-dimension
      // "current real distribution" are both frozen at generation start.
      std::vector<std::vector<double>> best_rows;
      best_rows.reserve(nb);
      for (size_t j = 0; j < nb; ++j) best_rows.push_back(points[order[j]]);
      for (size_t d = 0; d < dims; ++d) {
        double mean = 0.0;
        for (const auto& row : best_rows) mean += row[d];
        mean /= static_cast<double>(nb);
        double var = 0.0;
        for (const auto& row : best_rows) {
          double dv = row[d] - mean;
          var += dv * dv;
        }
        var /= static_cast<double>(nb);
        double floor_sd = 1e-3 * (space.dims[d].hi - space.dims[d].lo);
        fit_mean[d] = mean;
        fit_sd[d] = std::max(std::sqrt(var), floor_sd);
      }

      double prev_best = r.best_cost;
      for (size_t i = 0; i < m; ++i) {
        int g = group[i];
        cand = points[i];
        bool changed = false;
        for (size_t d = 0; d < dims; ++d) {
          if (rng.uniform() >= spec.alpha[g]) continue;
          changed = true;
          if (rng.uniform() < spec.beta[g]) {
            const auto& donor = best_rows[rng.next_u64() % nb];
            cand[d] = donor[d];
          } else if (rng.uniform() < spec.gamma[g]) {
            cand[d] = space.sample_dim(d, rng);
          } else {
            cand[d] = rng.trunc_normal(fit_mean[d], fit_sd[d], space.dims[d].lo,
                                       space.dims[d].hi);
          }
        }
        if (!changed) continue;
        if (eval.exhausted()) {
          budget_hit = true;
          break;
        }
        double c = eval(cand);
        points[i] = cand;
        costs[i] = c;
        if (c < r.best_cost) {
          r.best_cost = c;
          r.best_point = cand;
        }
      }
      stagnant = r.best_cost < prev_best ? 0 : stagnant + 1;
      if (eval.exhausted()) budget_hit = true;
    }
  }

  if (r.best_point.empty() && r.evaluations == 0 && eval.count == 0) {
    // Degenerate zero budget: report the mean individual unevaluated.
    r.best_point = space.mean_point();
  }
  r.evaluations = eval.count;
  return r;
}

OptimResult run_optimizer(const ParamSpace& space, const CostFn& cost,
                          const OptimizerSpec& spec,
                          std::span<const std::vector<double>> warm_start,
                          const EvalRecorder& recorder) {
  switch (spec.method) {
    case OptimMethod::Greedy:
      return run_greedy(space, cost, spec, warm_start, recorder);
    case OptimMethod::SimulatedAnnealing:
      return run_simulated_annealing(space, cost, spec, warm_start, recorder);
    case OptimMethod::Genetic:
      return run_genetic(space, cost, spec, warm_start, recorder);
  }
  throw std::invalid_argument("optimizer: unknown method");
}

}  // namespace crowdtrack
