#include "crowdtrack/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace crowdtrack {
namespace {

using FrameIndex = std::map<int64_t, std::vector<std::pair<AgentId, Vec2>>>;

FrameIndex index_by_frame(const TrajectoryDataset& ds) {
  FrameIndex idx;
  for (const TrajRecord& r : ds.records) {
    idx[r.frame].emplace_back(r.agent_id, Vec2{r.x, r.y});
  }
  for (auto& [frame, v] : idx) {
    std::sort(v.begin(), v.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  }
  return idx;
}

constexpr double kBigCost = 1e9;

// Minimum-cost rectangular assignment (potentials + augmenting paths).
// Returns the column assigned to each row, -1 when unassigned.
std::vector<int> hungarian_assign(const std::vector<std::vector<double>>& cost) {
  const size_t rows = cost.size();
  const size_t cols = rows == 0 ? 0 : cost[0].size();
  if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);

  const bool transposed = rows > cols;
  const size_t n = transposed ? cols : rows;
  const size_t m = transposed ? rows : cols;
  auto at = [&](size_t i, size_t j) { return transposed ? cost[j][i] : cost[i][j]; };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<size_t> p(m + 1, 0), way(m + 1, 0);
  for (size_t i = 1; i <= n; ++i) {
    p[0] = i;
    size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const size_t i0 = p[j0];
      size_t j1 = 0;
      double delta = inf;
      for (size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(rows, -1);
  for (size_t j = 1; j <= m; ++j) {
    if (p[j] == 0) continue;
    if (transposed) {
      row_to_col[j - 1] = static_cast<int>(p[j] - 1);
    } else {
      row_to_col[p[j] - 1] = static_cast<int>(j - 1);
    }
  }
  return row_to_col;
}

}  // namespace

void MatchConfig::validate() const {
  if (!(match_radius > 0.0) || !(success_threshold > 0.0)) {
    throw std::invalid_argument("match config: radii must be positive");
  }
}

MotScore clear_mot(const TrajectoryDataset& gt, const TrajectoryDataset& est,
                   const MatchConfig& cfg) {
  cfg.validate();
  if (gt.empty()) throw std::invalid_argument("clear_mot: empty ground truth");

  const FrameIndex gt_idx = index_by_frame(gt);
  const FrameIndex est_idx = index_by_frame(est);
  std::set<int64_t> frames;
  for (const auto& [f, v] : gt_idx) frames.insert(f);
  for (const auto& [f, v] : est_idx) frames.insert(f);

  static const std::vector<std::pair<AgentId, Vec2>> kEmpty;
  MotScore score;
  double dist_sum = 0.0;
  std::map<AgentId, AgentId> active;  // gt id -> est id carried from last frame
  std::map<AgentId, AgentId> last_partner;  // for switch detection across gaps

  for (int64_t f : frames) {
    auto git = gt_idx.find(f);
    auto eit = est_idx.find(f);
    const auto& g = git != gt_idx.end() ? git->second : kEmpty;
    const auto& e = eit != est_idx.end() ? eit->second : kEmpty;
    score.total_gt_objects += static_cast<int64_t>(g.size());

    std::map<AgentId, Vec2> gpos, epos;
    for (const auto& [id, p] : g) gpos[id] = p;
    for (const auto& [id, p] : e) epos[id] = p;

    // Stage 1: persist still-valid correspondences.
    std::map<AgentId, AgentId> next_active;
    std::set<AgentId> est_used;
    for (const auto& [gid, eid] : active) {
      auto gp = gpos.find(gid);
      auto ep = epos.find(eid);
      if (gp == gpos.end() || ep == epos.end()) continue;
      const double d = norm(gp->second - ep->second);
      if (d > cfg.match_radius) continue;
      next_active[gid] = eid;
      est_used.insert(eid);
      ++score.matches;
      dist_sum += d;
    }

    // Stage 2: associate the remainder under the gate.
    std::vector<AgentId> g_rem, e_rem;
    for (const auto& [id, p] : g) {
      if (!next_active.count(id)) g_rem.push_back(id);
    }
    for (const auto& [id, p] : e) {
      if (!est_used.count(id)) e_rem.push_back(id);
    }

    std::vector<std::pair<AgentId, AgentId>> formed;
    if (cfg.use_hungarian && !g_rem.empty() && !e_rem.empty()) {
      std::vector<std::vector<double>> cost(g_rem.size(),
                                            std::vector<double>(e_rem.size()));
      for (size_t i = 0; i < g_rem.size(); ++i) {
        for (size_t j = 0; j < e_rem.size(); ++j) {
          const double d = norm(gpos.at(g_rem[i]) - epos.at(e_rem[j]));
          cost[i][j] = d <= cfg.match_radius ? d : kBigCost;
        }
      }
      const std::vector<int> assign = hungarian_assign(cost);
      for (size_t i = 0; i < g_rem.size(); ++i) {
        if (assign[i] >= 0 && cost[i][static_cast<size_t>(assign[i])] <= cfg.match_radius) {
          formed.emplace_back(g_rem[i], e_rem[static_cast<size_t>(assign[i])]);
        }
      }
    } else {
      // Greedy nearest neighbor: smallest distance first, ties by id order.
      struct Cand {
        double d;
        AgentId gid, eid;
      };
      std::vector<Cand> cands;
      for (AgentId gid : g_rem) {
        for (AgentId eid : e_rem) {
          const double d = norm(gpos.at(gid) - epos.at(eid));
          if (d <= cfg.match_radius) cands.push_back({d, gid, eid});
        }
      }
      std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.d != b.d) return a.d < b.d;
        if (a.gid != b.gid) return a.gid < b.gid;
        return a.eid < b.eid;
      });
      std::set<AgentId> g_used;
      for (const Cand& c : cands) {
        if (g_used.count(c.gid) || est_used.count(c.eid)) continue;
        g_used.insert(c.gid);
        est_used.insert(c.eid);
        formed.emplace_back(c.gid, c.eid);
      }
    }

    for (const auto& [gid, eid] : formed) {
      ++score.matches;
      dist_sum += norm(gpos.at(gid) - epos.at(eid));
      est_used.insert(eid);
      auto prev = last_partner.find(gid);
      if (prev != last_partner.end() && prev->second != eid) ++score.id_switches;
      next_active[gid] = eid;
    }
    for (const auto& [gid, eid] : next_active) last_partner[gid] = eid;

    score.misses += static_cast<int64_t>(g.size() - next_active.size());
    score.false_positives += static_cast<int64_t>(e.size() - est_used.size());
    active = std::move(next_active);
  }

  score.motp = score.matches > 0 ? dist_sum / static_cast<double>(score.matches) : 0.0;
  score.mota = 1.0 - static_cast<double>(score.misses + score.false_positives +
                                         score.id_switches) /
                         static_cast<double>(score.total_gt_objects);
  return score;
}

TrackQuality success_and_switches(const TrajectoryDataset& gt,
                                  const TrajectoryDataset& est,
                                  const MatchConfig& cfg) {
  cfg.validate();
  if (gt.empty()) throw std::invalid_argument("success_and_switches: empty ground truth");

  std::map<std::pair<int64_t, AgentId>, Vec2> est_at;
  std::set<AgentId> est_agents;
  for (const TrajRecord& r : est.records) {
    est_at[{r.frame, r.agent_id}] = Vec2{r.x, r.y};
    est_agents.insert(r.agent_id);
  }

  std::map<AgentId, std::pair<double, int64_t>> acc;  // id -> (error sum, pairs)
  std::set<AgentId> gt_agents;
  for (const TrajRecord& r : gt.records) {
    gt_agents.insert(r.agent_id);
    acc.try_emplace(r.agent_id, 0.0, 0);
    auto it = est_at.find({r.frame, r.agent_id});
    if (it == est_at.end()) continue;
    auto& [sum, count] = acc[r.agent_id];
    sum += norm(Vec2{r.x, r.y} - it->second);
    ++count;
  }

  TrackQuality q;
  q.total_tracks = static_cast<int64_t>(gt_agents.size());
  for (const auto& [id, sc] : acc) {
    const auto& [sum, count] = sc;
    const double mean =
        count > 0 ? sum / static_cast<double>(count) : std::numeric_limits<double>::infinity();
    q.mean_error[id] = mean;
    if (mean < cfg.success_threshold) ++q.successful_tracks;
  }
  for (AgentId id : est_agents) {
    if (!gt_agents.count(id)) ++q.false_tracks;
  }
  q.id_switches = clear_mot(gt, est, cfg).id_switches;
  return q;
}

double rms_error(const TrajectoryDataset& gt, const TrajectoryDataset& est) {
  std::map<std::pair<int64_t, AgentId>, Vec2> est_at;
  for (const TrajRecord& r : est.records) est_at[{r.frame, r.agent_id}] = Vec2{r.x, r.y};

  double sq_sum = 0.0;
  int64_t pairs = 0;
  for (const TrajRecord& r : gt.records) {
    auto it = est_at.find({r.frame, r.agent_id});
    if (it == est_at.end()) continue;
    sq_sum += norm_sq(Vec2{r.x, r.y} - it->second);
    ++pairs;
  }
  if (pairs == 0) throw std::invalid_argument("rms_error: no overlapping (frame, agent) pairs");
  return std::sqrt(sq_sum / static_cast<double>(pairs));
}

EvalReport evaluate(const TrajectoryDataset& gt, const TrajectoryDataset& est,
                    const MatchConfig& cfg) {
  EvalReport report;
  report.mot = clear_mot(gt, est, cfg);
  report.quality = success_and_switches(gt, est, cfg);
  report.rms = rms_error(gt, est);
  return report;
}

std::string eval_report_json(const EvalReport& report) {
  nlohmann::json j;
  j["mota"] = report.mot.mota;
  j["motp"] = report.mot.motp;
  j["misses"] = report.mot.misses;
  j["false_positives"] = report.mot.false_positives;
  j["id_switches"] = report.mot.id_switches;
  j["matches"] = report.mot.matches;
  j["total_gt_objects"] = report.mot.total_gt_objects;
  j["successful_tracks"] = report.quality.successful_tracks;
  j["total_tracks"] = report.quality.total_tracks;
  j["false_tracks"] = report.quality.false_tracks;
  j["success_rate"] = report.quality.success_rate();
  j["rms_error"] = report.rms;
  nlohmann::json per_agent = nlohmann::json::object();
  for (const auto& [id, e] : report.quality.mean_error) {
    per_agent[std::to_string(id)] =
        std::isfinite(e) ? nlohmann::json(e) : nlohmann::json(nullptr);
  }
  j["per_agent_mean_error"] = per_agent;
  return j.dump(2) + "\n";
}

std::string eval_report_csv(const EvalReport& report) {
  std::ostringstream os;
  os.precision(9);
  os << "mota,motp,misses,false_positives,id_switches,matches,total_gt_objects,"
        "successful_tracks,total_tracks,false_tracks,success_rate,rms_error\n";
  os << report.mot.mota << ',' << report.mot.motp << ',' << report.mot.misses << ','
     << report.mot.false_positives << ',' << report.mot.id_switches << ','
     << report.mot.matches << ',' << report.mot.total_gt_objects << ','
     << report.quality.successful_tracks << ',' << report.quality.total_tracks << ','
     << report.quality.false_tracks << ',' << report.quality.success_rate() << ','
     << report.rms << '\n';
  return os.str();
}

}  // namespace crowdtrack
