#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prefshift/env.hpp"

namespace prefshift {

/// One user's interaction log: slates and choices per step, plus ground-truth
/// preferences when the log comes from the simulator.
struct Trajectory {
  std::vector<Slate> slates;
  std::vector<int> choices;
  std::optional<std::vector<int>> gt_prefs;
  std::string policy_id;
  std::int64_t user_id = 0;

  int length() const { return static_cast<int>(slates.size()); }
  void validate(const PrefSpace& space) const;
};

/// JSONL serialization: one trajectory per line with keys user_id, policy_id,
/// slates, choices and optional gt_prefs. Doubles round-trip bit-exactly.
void write_trajectories_jsonl(const std::string& path, const std::vector<Trajectory>& trajs);
std::vector<Trajectory> read_trajectories_jsonl(const std::string& path);

std::string trajectory_to_json_line(const Trajectory& traj);
Trajectory trajectory_from_json_line(const std::string& line);

}  // namespace prefshift
