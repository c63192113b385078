#include "crowdtrack/core/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace crowdtrack {

namespace {

bool record_less(const TrajRecord& a, const TrajRecord& b) {
  if (a.frame != b.frame) return a.frame < b.frame;
  return a.agent_id < b.agent_id;
}

void append_double(std::string& out, double v) {
  char buf[40];
  int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<size_t>(n));
}

double parse_double(const std::string& s, const char* what, size_t line_no) {
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("trajectory csv line " + std::to_string(line_no) +
                                ": bad " + std::string(what) + " value '" + s + "'");
  }
}

int64_t parse_int(const std::string& s, const char* what, size_t line_no) {
  int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw std::invalid_argument("trajectory csv line " + std::to_string(line_no) +
                                ": bad " + std::string(what) + " value '" + s + "'");
  }
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void TrajectoryDataset::sort_records() {
  std::stable_sort(records.begin(), records.end(), record_less);
}

void TrajectoryDataset::validate() const {
  if (frame_rate <= 0.0) {
    throw std::invalid_argument("trajectory: frame_rate must be > 0");
  }
  for (size_t i = 0; i < records.size(); ++i) {
    const TrajRecord& r = records[i];
    if (!std::isfinite(r.x) || !std::isfinite(r.y) ||
        (r.has_velocity && (!std::isfinite(r.vx) || !std::isfinite(r.vy)))) {
      throw std::invalid_argument("trajectory: non-finite value at frame " +
                                  std::to_string(r.frame) + " agent " +
                                  std::to_string(r.agent_id));
    }
    if (i > 0 && !record_less(records[i - 1], r)) {
      if (records[i - 1].frame == r.frame && records[i - 1].agent_id == r.agent_id) {
        throw std::invalid_argument("trajectory: duplicate record for frame " +
                                    std::to_string(r.frame) + " agent " +
                                    std::to_string(r.agent_id));
      }
      throw std::invalid_argument("trajectory: records not sorted by (frame, agent)");
    }
  }
  if (source_tag == SourceTag::Observation) return;  // gaps model occlusion
  std::map<AgentId, int64_t> last_seen;
  for (const TrajRecord& r : records) {
    auto it = last_seen.find(r.agent_id);
    if (it != last_seen.end() && r.frame != it->second + 1) {
      throw std::invalid_argument("trajectory: agent " + std::to_string(r.agent_id) +
                                  " has a frame gap between " +
                                  std::to_string(it->second) + " and " +
                                  std::to_string(r.frame));
    }
    last_seen[r.agent_id] = r.frame;
  }
}

int64_t TrajectoryDataset::first_frame() const {
  if (records.empty()) throw std::invalid_argument("trajectory: empty dataset");
  return records.front().frame;
}

int64_t TrajectoryDataset::last_frame() const {
  if (records.empty()) throw std::invalid_argument("trajectory: empty dataset");
  return records.back().frame;
}

std::vector<AgentId> TrajectoryDataset::agent_ids() const {
  std::set<AgentId> ids;
  for (const TrajRecord& r : records) ids.insert(r.agent_id);
  return {ids.begin(), ids.end()};
}

Snapshot TrajectoryDataset::frame_snapshot(int64_t frame) const {
  Snapshot snap;
  TrajRecord probe;
  probe.frame = frame;
  probe.agent_id = std::numeric_limits<AgentId>::min();
  auto it = std::lower_bound(records.begin(), records.end(), probe, record_less);
  for (; it != records.end() && it->frame == frame; ++it) {
    snap[it->agent_id] = AgentState{{it->x, it->y}, {it->vx, it->vy}};
  }
  return snap;
}

std::string trajectory_to_csv(const TrajectoryDataset& ds) {
  bool with_vel = !ds.records.empty();
  for (const TrajRecord& r : ds.records) with_vel = with_vel && r.has_velocity;
  std::string out = with_vel ? "frame,agent_id,x,y,vx,vy\n" : "frame,agent_id,x,y\n";
  char head[64];
  for (const TrajRecord& r : ds.records) {
    int n = std::snprintf(head, sizeof head, "%" PRId64 ",%d,", r.frame, r.agent_id);
    out.append(head, static_cast<size_t>(n));
    append_double(out, r.x);
    out.push_back(',');
    append_double(out, r.y);
    if (with_vel) {
      out.push_back(',');
      append_double(out, r.vx);
      out.push_back(',');
      append_double(out, r.vy);
    }
    out.push_back('\n');
  }
  return out;
}

TrajectoryDataset trajectory_from_csv(const std::string& text) {
  TrajectoryDataset ds;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  bool with_vel = false;
  if (!std::getline(in, line)) throw std::invalid_argument("trajectory csv: empty input");
  ++line_no;
  {
    auto cols = split_csv(line);
    if (cols.size() == 6 && cols[4] == "vx" && cols[5] == "vy") {
      with_vel = true;
    } else if (cols.size() != 4) {
      throw std::invalid_argument("trajectory csv: bad header '" + line + "'");
    }
    if (cols[0] != "frame" || cols[1] != "agent_id" || cols[2] != "x" || cols[3] != "y") {
      throw std::invalid_argument("trajectory csv: bad header '" + line + "'");
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cols = split_csv(line);
    if (cols.size() != (with_vel ? 6u : 4u)) {
      throw std::invalid_argument("trajectory csv line " + std::to_string(line_no) +
                                  ": expected " + std::to_string(with_vel ? 6 : 4) +
                                  " columns, got " + std::to_string(cols.size()));
    }
    TrajRecord r;
    r.frame = parse_int(cols[0], "frame", line_no);
    r.agent_id = static_cast<AgentId>(parse_int(cols[1], "agent_id", line_no));
    r.x = parse_double(cols[2], "x", line_no);
    r.y = parse_double(cols[3], "y", line_no);
    if (with_vel) {
      r.vx = parse_double(cols[4], "vx", line_no);
      r.vy = parse_double(cols[5], "vy", line_no);
      r.has_velocity = true;
    }
    ds.records.push_back(r);
  }
  ds.sort_records();
  return ds;
}

TrajectoryDataset read_trajectory_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open trajectory csv: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return trajectory_from_csv(ss.str());
}

void write_trajectory_csv(const TrajectoryDataset& ds, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write trajectory csv: " + path);
  f << trajectory_to_csv(ds);
}

VelocityField finite_difference_velocities(const TrajectoryDataset& ds) {
  VelocityField out;
  std::map<AgentId, std::vector<std::pair<int64_t, Vec2>>> tracks;
  for (const TrajRecord& r : ds.records) {
    tracks[r.agent_id].emplace_back(r.frame, Vec2{r.x, r.y});
  }
  for (const auto& [id, tr] : tracks) {
    if (tr.size() == 1) {
      out.single_frame_agents.insert(id);
      out.at[{tr[0].first, id}] = Vec2{};
      continue;
    }
    for (size_t i = 1; i < tr.size(); ++i) {
      double span = static_cast<double>(tr[i].first - tr[i - 1].first);
      Vec2 v = (tr[i].second - tr[i - 1].second) * (ds.frame_rate / span);
      out.at[{tr[i].first, id}] = v;
    }
    out.at[{tr[0].first, id}] = out.at[{tr[1].first, id}];
  }
  return out;
}

}  // namespace crowdtrack
