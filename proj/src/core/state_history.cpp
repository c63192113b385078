#include "crowdtrack/core/state_history.hpp"

#include <stdexcept>
#include <string>

namespace crowdtrack {

StateHistory::StateHistory(int k, double dt) : k_(k), dt_(dt) {
  if (k < 1) throw std::invalid_argument("StateHistory: k must be >= 1");
  if (dt <= 0.0) throw std::invalid_argument("StateHistory: dt must be > 0");
}

void StateHistory::push(int64_t frame, Snapshot snapshot) {
  if (!window_.empty() && frame != newest_frame() + 1) {
    throw std::invalid_argument(
        "StateHistory: out-of-order snapshot, expected frame " +
        std::to_string(newest_frame() + 1) + " got " + std::to_string(frame));
  }
  for (const auto& [id, st] : snapshot) {
    if (!st.finite()) {
      throw std::invalid_argument("StateHistory: non-finite state for agent " +
                                  std::to_string(id));
    }
  }
  window_.emplace_back(frame, std::move(snapshot));
  if (window_.size() > capacity()) window_.pop_front();
}

std::vector<AgentId> StateHistory::agents_in_all_frames() const {
  std::vector<AgentId> out;
  if (window_.empty()) return out;
  for (const auto& [id, st] : window_.front().second) {
    bool everywhere = true;
    for (size_t i = 1; i < window_.size() && everywhere; ++i) {
      everywhere = window_[i].second.count(id) > 0;
    }
    if (everywhere) out.push_back(id);
  }
  return out;
}

}  // namespace crowdtrack
