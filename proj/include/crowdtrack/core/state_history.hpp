#pragma once

#include <cstdint>
#include <deque>
#include <utility>
#include <vector>

#include "crowdtrack/core/types.hpp"

namespace crowdtrack {

// Rolling window of the newest k+1 snapshots at fixed timestep dt.
// Frames must arrive consecutively; out-of-order pushes are protocol errors.
class StateHistory {
 public:
  StateHistory(int k, double dt);

  int k() const { return k_; }
  double dt() const { return dt_; }
  size_t capacity() const { return static_cast<size_t>(k_) + 1; }
  size_t size() const { return window_.size(); }
  bool full() const { return window_.size() == capacity(); }

  // Throws std::invalid_argument unless frame == newest_frame() + 1 (or the
  // window is empty), or if any state is non-finite.
  void push(int64_t frame, Snapshot snapshot);

  // i = 0 is the oldest retained snapshot.
  const Snapshot& snapshot(size_t i) const { return window_.at(i).second; }
  int64_t frame_at(size_t i) const { return window_.at(i).first; }
  const Snapshot& newest() const { return window_.back().second; }
  const Snapshot& oldest() const { return window_.front().second; }
  int64_t newest_frame() const { return window_.back().first; }
  int64_t oldest_frame() const { return window_.front().first; }

  // Agents present in every retained snapshot; the replay engine only scores
  // these.
  std::vector<AgentId> agents_in_all_frames() const;

 private:
  int k_;
  double dt_;
  std::deque<std::pair<int64_t, Snapshot>> window_;
};

}  // namespace crowdtrack
