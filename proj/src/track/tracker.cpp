#include "crowdtrack/track/tracker.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "crowdtrack/core/state_history.hpp"
#include "crowdtrack/core/thread_pool.hpp"

namespace crowdtrack {
namespace {

constexpr uint64_t kPropagateKey = 0x70726f70;  // "prop"
constexpr uint64_t kResampleKey = 0x72736d70;   // "rsmp"
constexpr uint64_t kOnsetKey = 0x6f636a74;      // "ocjt": occlusion-onset jitter

struct AgentTrack {
  AgentId id = 0;
  ParticleSet set;
  AgentState est{};    // committed estimate for the last finished frame
  int64_t born = 0;    // frame of first sighting
  Vec2 course{};       // window-mean heading, refreshed only while observed
  bool has_course = false;
  bool was_observed = true;  // last frame's visibility, for onset detection
};

// Per-frame results the parallel body writes into its own slot; committed
// serially in index order afterwards so outputs never depend on thread count.
struct FrameSlot {
  AgentState est{};
  Confidence conf{};
  int particles = 0;
  bool observed = false;
  bool lost = false;
  double err = -1.0;
};

// Least-squares slope of pos over time for one agent's observed seed-window
// samples; a single sample has no slope.
Vec2 ls_velocity(const std::vector<std::pair<int64_t, Vec2>>& samples, double dt) {
  const size_t n = samples.size();
  if (n < 2) return {};
  double t_mean = 0.0;
  Vec2 p_mean{};
  for (const auto& [f, p] : samples) {
    t_mean += static_cast<double>(f) * dt;
    p_mean = p_mean + p;
  }
  t_mean /= static_cast<double>(n);
  p_mean = p_mean * (1.0 / static_cast<double>(n));
  double stt = 0.0;
  Vec2 stp{};
  for (const auto& [f, p] : samples) {
    const double u = static_cast<double>(f) * dt - t_mean;
    stt += u * u;
    stp = stp + (p - p_mean) * u;
  }
  if (stt <= 0.0) return {};
  return stp * (1.0 / stt);
}

}  // namespace

void TrackerConfig::validate() const {
  if (window_k < 2) throw std::invalid_argument("tracker: window_k must be >= 2");
  if (threads < 1) throw std::invalid_argument("tracker: threads must be >= 1");
  if (!std::isfinite(goal_horizon) || goal_horizon < 0.0) {
    throw std::invalid_argument("tracker: goal_horizon must be finite and >= 0");
  }
  noise.validate();
  confidence.validate();
}

std::string diagnostics_to_csv(std::span<const DiagnosticsRow> rows) {
  std::ostringstream os;
  os << "frame,agent_id,model,particles,pr,mmr,err\n";
  os.precision(9);
  for (const DiagnosticsRow& r : rows) {
    os << r.frame << ',' << r.agent_id << ',' << to_string(r.model) << ','
       << r.particles << ',' << r.pr << ',' << r.mmr << ',' << r.err << '\n';
  }
  return os.str();
}

TrackOutput track(const TrajectoryDataset& observations, const Scenario& scenario,
                  const TrackerConfig& config) {
  config.validate();
  observations.validate();
  if (observations.empty()) throw std::runtime_error("tracker: empty observations");

  const double dt = 1.0 / observations.frame_rate;
  if (std::abs(scenario.dt - dt) > 1e-9) {
    throw std::runtime_error("tracker: scenario.dt does not match the frame rate");
  }

  const int k = config.window_k;
  const int64_t f0 = observations.first_frame();
  const int64_t f_last = observations.last_frame();
  if (f_last - f0 + 1 < k + 1) {
    throw std::runtime_error("tracker: need at least window_k+1 observation frames");
  }

  // --- Seed phase: the first k observation frames become estimates verbatim,
  // occluded agents holding their last seen position so the estimate stream
  // is gap-free from first sighting.
  std::vector<Snapshot> seed_snaps;
  seed_snaps.reserve(static_cast<size_t>(k));
  std::map<AgentId, std::vector<std::pair<int64_t, Vec2>>> seen;
  std::map<AgentId, int64_t> born_at;
  {
    Snapshot running;
    for (int j = 0; j < k; ++j) {
      const int64_t f = f0 + j;
      for (const auto& [id, s] : observations.frame_snapshot(f)) {
        running[id] = AgentState{s.pos, Vec2{}};
        seen[id].emplace_back(f, s.pos);
        born_at.emplace(id, f);
      }
      seed_snaps.push_back(running);
    }
  }
  std::map<AgentId, Vec2> seed_vel;
  for (const auto& [id, samples] : seen) seed_vel[id] = ls_velocity(samples, dt);
  for (Snapshot& snap : seed_snaps) {
    for (auto& [id, s] : snap) s.vel = seed_vel.at(id);
  }

  TrackOutput out;
  out.estimates.frame_rate = observations.frame_rate;
  out.estimates.source_tag = SourceTag::Estimate;
  auto emit = [&](int64_t frame, const Snapshot& snap) {
    for (const auto& [id, s] : snap) {
      out.estimates.records.push_back(
          {frame, id, s.pos.x, s.pos.y, s.vel.x, s.vel.y, true});
    }
  };

  StateHistory window(k, dt);
  for (int j = 0; j < k; ++j) {
    window.push(f0 + j, seed_snaps[static_cast<size_t>(j)]);
    emit(f0 + j, seed_snaps[static_cast<size_t>(j)]);
  }

  // Tracks stay sorted by id; index order is the deterministic commit order.
  std::vector<AgentTrack> tracks;
  for (const auto& [id, s] : seed_snaps.back()) {
    AgentTrack tr;
    tr.id = id;
    tr.est = s;
    tr.born = born_at.at(id);
    tr.set.agent_id = id;
    tr.set.init_at(s, static_cast<size_t>(config.confidence.n_max));
    tracks.push_back(std::move(tr));
  }

  CalibrationEngine engine(config.calibration, config.seed);
  std::array<ModelKind, 1> forced_storage{ModelKind::Lin};
  std::span<const ModelKind> kinds = kAllModels;
  if (config.forced_model) {
    forced_storage[0] = *config.forced_model;
    kinds = forced_storage;
  }

  ThreadPool pool(config.threads);
  CalibrationResult current;  // empty until the first tracked frame calibrates
  std::vector<FrameSlot> slots;
  int64_t particle_row_sum = 0;
  int64_t particle_rows = 0;

  const int64_t first_tracked = f0 + k;
  const auto t_start = std::chrono::steady_clock::now();

  for (int64_t f = first_tracked; f <= f_last; ++f) {
    const Snapshot obs = observations.frame_snapshot(f);

    // Births: unseen ids start a track at the observation with unknown
    // velocity and a full particle budget.
    bool born_this_frame = false;
    for (const auto& [id, s] : obs) {
      const bool known = std::any_of(tracks.begin(), tracks.end(),
                                     [&](const AgentTrack& t) { return t.id == id; });
      if (known) continue;
      AgentTrack tr;
      tr.id = id;
      tr.est = AgentState{s.pos, Vec2{}};
      tr.born = f;
      tr.set.agent_id = id;
      tr.set.init_at(tr.est, static_cast<size_t>(config.confidence.n_max));
      tracks.push_back(std::move(tr));
      born_this_frame = true;
    }
    if (born_this_frame) {
      std::sort(tracks.begin(), tracks.end(),
                [](const AgentTrack& a, const AgentTrack& b) { return a.id < b.id; });
    }
    const size_t n_tracks = tracks.size();

    if ((f - first_tracked) % config.calibration.recalibrate_every == 0) {
      // Unobserved agents' windows only echo the prior's own guesses, so
      // their parameters and model choice stay frozen at the last grounded
      // fit instead of being refit to hallucinated motion.
      std::vector<AgentId> frozen;
      for (const AgentTrack& tr : tracks) {
        if (!obs.count(tr.id)) frozen.push_back(tr.id);
      }
      current = engine.calibrate(window, scenario, config.constants, f, kinds, frozen);
      out.calibrations.push_back({f, current});
      ++out.summary.calibration_count;
      out.summary.calibration_seconds += current.wall_time_s;
    }

    // Freeze the crowd at the committed estimates: neighbors, goals, and the
    // point prediction all read this frame-start state.
    CrowdState crowd;
    crowd.ids.resize(n_tracks);
    crowd.st.resize(n_tracks);
    std::vector<ModelKind> kind_of(n_tracks, ModelKind::Lin);
    for (size_t i = 0; i < n_tracks; ++i) {
      crowd.ids[i] = tracks[i].id;
      crowd.st[i] = tracks[i].est;
      if (config.forced_model) {
        kind_of[i] = *config.forced_model;
      } else {
        auto it = current.per_agent_kind.find(tracks[i].id);
        if (it != current.per_agent_kind.end()) kind_of[i] = it->second;
      }
    }

    std::array<std::unique_ptr<DenseParams>, kAllModels.size()> dp_by_kind;
    static const ModelParams kEmptyByKind[] = {
        ModelParams{ModelKind::Lin, {}},
        ModelParams{ModelKind::Boids, {}},
        ModelParams{ModelKind::SocialForces, {}},
        ModelParams{ModelKind::Rvo, {}},
    };
    for (size_t i = 0; i < n_tracks; ++i) {
      const auto ki = static_cast<size_t>(kind_of[i]);
      if (dp_by_kind[ki]) continue;
      auto it = current.per_model_params.find(kind_of[i]);
      const ModelParams& table =
          it != current.per_model_params.end() ? it->second : kEmptyByKind[ki];
      dp_by_kind[ki] =
          std::make_unique<DenseParams>(dense_params_or_means(kind_of[i], table, crowd.ids));
    }

    slots.assign(n_tracks, FrameSlot{});

    pool.parallel_for(n_tracks, [&](size_t i) {
      AgentTrack& tr = tracks[i];
      FrameSlot& slot = slots[i];

      if (tr.born == f) {  // initialized at this frame's observation
        slot.est = tr.est;
        slot.conf = Confidence{0.0, 0.0, 0.0};
        slot.particles = config.confidence.n_max;
        slot.observed = true;
        slot.err = 0.0;
        return;
      }

      static thread_local StepWorkspace ws;
      ws.grid_crowd = nullptr;  // never reuse a stale grid across frames

      // Earliest window snapshot containing this agent anchors total drift
      // for pr and the course direction for the goal.
      Vec2 first_pos = tr.est.pos;
      int span = 1;
      double elapsed = 0.0;
      for (size_t s = 0; s < window.size(); ++s) {
        const Snapshot& snap = window.snapshot(s);
        auto it = snap.find(tr.id);
        if (it != snap.end()) {
          first_pos = it->second.pos;
          span = static_cast<int>(f - window.frame_at(s));
          elapsed = static_cast<double>((f - 1) - window.frame_at(s)) * dt;
          break;
        }
      }

      auto obs_it = obs.find(tr.id);
      slot.observed = obs_it != obs.end();

      const ModelKind kind = kind_of[i];
      const DenseParams& dp = *dp_by_kind[static_cast<size_t>(kind)];
      // Goals extrapolate the window-mean course, not the instantaneous
      // velocity: mid-maneuver the smoothed heading still points down-course,
      // so the prior swings back instead of continuing the dodge forever.
      // While the agent is occluded the window fills with the prior's own
      // rollout, so re-deriving the course would let a wrong dodge bend its
      // own goal; dead-reckon the last observed heading instead.
      if (slot.observed || !tr.has_course) {
        tr.course = elapsed > 0.0 ? (tr.est.pos - first_pos) * (1.0 / elapsed)
                                  : tr.est.vel;
        tr.has_course = true;
      }
      const Vec2 goal = tr.est.pos + tr.course * config.goal_horizon;
      const FrozenAgentPrior prior = freeze_agent_prior(
          kind, crowd, i, goal, dp, scenario, config.constants, ws);
      const Vec2 predicted = prior(tr.est).pos;

      // Occluded agents run pure prediction: exploration noise exists to be
      // pruned by the observation likelihood, and with no reweight to follow
      // it would only diffuse the cloud off the prior's manifold (the
      // finite-difference velocity turns per-step position noise into a
      // velocity random walk).
      NoiseModel prop_noise = config.noise;
      if (!slot.observed) {
        prop_noise.process_sigma = 0.0;
        // Onset of an occlusion: spread the cloud once. Offsets persist
        // through the deterministic rollout while velocities stay on the
        // model, so the spread survives without the velocity random walk
        // per-frame noise would cause.
        if (tr.was_observed && config.occlusion_onset_sigma > 0.0) {
          RngStream jitter =
              RngStream::keyed(config.seed, static_cast<uint64_t>(f),
                               static_cast<uint64_t>(tr.id), kOnsetKey);
          for (size_t pi = 0; pi < tr.set.size(); ++pi) {
            tr.set.px[pi] += jitter.normal(0.0, config.occlusion_onset_sigma);
            tr.set.py[pi] += jitter.normal(0.0, config.occlusion_onset_sigma);
          }
        }
      }
      tr.was_observed = slot.observed;
      RngStream prop_rng =
          RngStream::keyed(config.seed, static_cast<uint64_t>(f),
                           static_cast<uint64_t>(tr.id), kPropagateKey);
      pf_propagate(tr.set, prior, prop_noise, prop_rng);

      if (slot.observed) {
        slot.lost = !pf_reweight(tr.set, obs_it->second.pos,
                                 config.noise.observation_sigma);
      }

      const AgentState est = pf_estimate(tr.set);

      slot.conf = compute_confidence(first_pos, tr.est.pos, est.pos, predicted,
                                     span, dt, !slot.observed, config.confidence);
      if (slot.lost) {
        slot.conf.propagation = 0.0;
        slot.conf.combined = 0.0;
      }

      slot.particles = config.adaptive
                           ? adapt_particle_count(slot.conf, config.confidence)
                           : config.confidence.n_max;
      RngStream rs_rng =
          RngStream::keyed(config.seed, static_cast<uint64_t>(f),
                           static_cast<uint64_t>(tr.id), kResampleKey);
      pf_resample(tr.set, static_cast<size_t>(slot.particles), rs_rng);

      slot.est = est;
      slot.err = slot.observed ? norm(est.pos - obs_it->second.pos) : -1.0;
    });

    // Single synchronization point: commit estimates and diagnostics in index
    // order, then advance the window.
    Snapshot committed;
    for (size_t i = 0; i < n_tracks; ++i) {
      tracks[i].est = slots[i].est;
      committed[tracks[i].id] = slots[i].est;
      out.diagnostics.push_back({f, tracks[i].id, kind_of[i], slots[i].particles,
                                 slots[i].conf.propagation,
                                 slots[i].conf.motion_model, slots[i].err});
      if (slots[i].lost) ++out.summary.lost_track_events;
      ++out.summary.model_frequency[kind_of[i]];
      particle_row_sum += slots[i].particles;
      ++particle_rows;
    }
    window.push(f, committed);
    emit(f, committed);
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();

  out.summary.frames_tracked = f_last - first_tracked + 1;
  out.summary.frames_total = out.summary.frames_tracked + k;
  out.summary.steps_per_second =
      elapsed > 0.0 ? static_cast<double>(out.summary.frames_tracked) / elapsed : 0.0;
  out.summary.mean_particles =
      particle_rows > 0
          ? static_cast<double>(particle_row_sum) / static_cast<double>(particle_rows)
          : 0.0;

  out.estimates.sort_records();
  out.estimates.validate();
  return out;
}

}  // namespace crowdtrack
