#include "prefshift/trajectory.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace prefshift {

void Trajectory::validate(const PrefSpace& space) const {
  if (slates.size() != choices.size())
    throw std::invalid_argument("Trajectory: slates/choices length mismatch");
  if (gt_prefs && gt_prefs->size() != slates.size())
    throw std::invalid_argument("Trajectory: gt_prefs length mismatch");
  for (const auto& s : slates) check_simplex(s.probs, "Trajectory slate");
  for (int c : choices) space.check_bin(c);
  if (gt_prefs)
    for (int u : *gt_prefs) space.check_bin(u);
}

std::string trajectory_to_json_line(const Trajectory& traj) {
  nlohmann::json j;
  j["user_id"] = traj.user_id;
  j["policy_id"] = traj.policy_id;
  auto& slates = j["slates"] = nlohmann::json::array();
  for (const auto& s : traj.slates) {
    std::vector<double> probs(s.probs.data(), s.probs.data() + s.probs.size());
    slates.push_back(probs);
  }
  j["choices"] = traj.choices;
  if (traj.gt_prefs) j["gt_prefs"] = *traj.gt_prefs;
  return j.dump();
}

Trajectory trajectory_from_json_line(const std::string& line) {
  const nlohmann::json j = nlohmann::json::parse(line);
  Trajectory t;
  t.user_id = j.at("user_id").get<std::int64_t>();
  t.policy_id = j.at("policy_id").get<std::string>();
  for (const auto& s : j.at("slates")) {
    const auto probs = s.get<std::vector<double>>();
    t.slates.push_back(Slate{Eigen::Map<const Eigen::VectorXd>(probs.data(), probs.size())});
  }
  t.choices = j.at("choices").get<std::vector<int>>();
  if (j.contains("gt_prefs")) t.gt_prefs = j.at("gt_prefs").get<std::vector<int>>();
  return t;
}

void write_trajectories_jsonl(const std::string& path, const std::vector<Trajectory>& trajs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const auto& t : trajs) out << trajectory_to_json_line(t) << "\n";
}

std::vector<Trajectory> read_trajectories_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<Trajectory> trajs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    trajs.push_back(trajectory_from_json_line(line));
  }
  return trajs;
}

}  // namespace prefshift
