#include "prefshift/metrics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "prefshift/parallel.hpp"
#include "prefshift/rollout.hpp"

namespace prefshift {

void EvalConfig::validate() const {
  if (n_traj <= 0 || horizon <= 0) throw std::invalid_argument("EvalConfig: sizes must be positive");
  if (nu1 < 0 || nu2 < 0) throw std::invalid_argument("EvalConfig: penalty weights must be >= 0");
}

double cross_engagement(const PrefSpace& space, const Eigen::VectorXd& choice_dist,
                        const BeliefVec& safe_belief) {
  if (choice_dist.size() != space.n() || safe_belief.size() != space.n())
    throw std::invalid_argument("cross_engagement: size mismatch");
  return choice_dist.dot(space.cos_matrix() * safe_belief);
}

double shift_distance(const PrefSpace& space, const std::vector<Eigen::VectorXd>& choice_dists,
                      const std::vector<BeliefVec>& own_beliefs,
                      const std::vector<BeliefVec>& safe_beliefs) {
  if (choice_dists.size() != own_beliefs.size() || choice_dists.size() != safe_beliefs.size())
    throw std::invalid_argument("shift_distance: length mismatch");
  double d = 0.0;
  for (std::size_t t = 0; t < choice_dists.size(); ++t)
    d += cross_engagement(space, choice_dists[t], own_beliefs[t]) -
         cross_engagement(space, choice_dists[t], safe_beliefs[t]);
  return d;
}

double penalized_reward(const PrefSpace& space, const Eigen::VectorXd& choice_dist,
                        const BeliefVec& own_belief, const BeliefVec& u0_belief,
                        const BeliefVec& nps_belief, double nu1, double nu2) {
  return cross_engagement(space, choice_dist, own_belief) +
         nu1 * cross_engagement(space, choice_dist, u0_belief) +
         nu2 * cross_engagement(space, choice_dist, nps_belief);
}

ShiftMetrics evaluate_policy(Policy& policy, UserSim& user_proto, EstimatorStack& est_proto,
                             ChoiceModel& cm, const EvalConfig& cfg, Rng& rng) {
  cfg.validate();
  const PrefSpace& space = cm.space();
  std::vector<Eigen::Vector3d> per_traj(cfg.n_traj);
  parallel_for(cfg.n_traj, [&](int i) {
    Rng traj_rng = rng.split(i);
    auto pol = policy.clone();
    auto user = user_proto.clone();
    auto est = est_proto.clone();
    const RolloutTrace trace =
        roll_trajectory(*pol, *user, *est, cm, cfg.horizon, false, cfg.nu1, cfg.nu2, traj_rng);
    const BeliefVec u0_full = est->smoothing_full();
    const std::vector<BeliefVec> nps = est->nps_path(cfg.horizon - 1);
    double eng = 0, u0 = 0, nps_term = 0;
    for (int t = 0; t < cfg.horizon; ++t) {
      const auto& step = trace.steps[t];
      eng += cross_engagement(space, step.choice_dist, step.est.filtering);
      u0 += cross_engagement(space, step.choice_dist, u0_full);
      nps_term += cross_engagement(space, step.choice_dist, nps[t]);
    }
    per_traj[i] = Eigen::Vector3d(eng, u0, nps_term);
  });

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& v : per_traj) mean += v;
  mean /= cfg.n_traj;
  Eigen::Vector4d var = Eigen::Vector4d::Zero();
  for (const auto& v : per_traj) {
    const Eigen::Vector3d d = v - mean;
    var.head<3>() += d.cwiseProduct(d);
    const double ds = d.sum();
    var[3] += ds * ds;
  }
  var /= std::max(1, cfg.n_traj - 1);
  const double scale = std::sqrt(static_cast<double>(cfg.n_traj));

  ShiftMetrics m;
  m.eng = mean[0];
  m.eng_u0 = mean[1];
  m.eng_nps = mean[2];
  m.sum = mean.sum();
  m.se_eng = std::sqrt(var[0]) / scale;
  m.se_u0 = std::sqrt(var[1]) / scale;
  m.se_nps = std::sqrt(var[2]) / scale;
  m.se_sum = std::sqrt(var[3]) / scale;
  return m;
}

std::string shift_metrics_csv_header() {
  return "policy,training_mode,eval_mode,eng,eng_u0,eng_nps,sum,se_eng,se_u0,se_nps,se_sum";
}

std::string shift_metrics_csv_row(const std::string& policy_id, const std::string& training_mode,
                                  const std::string& eval_mode, const ShiftMetrics& m) {
  std::ostringstream os;
  os.precision(6);
  os << policy_id << ',' << training_mode << ',' << eval_mode << ',' << m.eng << ',' << m.eng_u0
     << ',' << m.eng_nps << ',' << m.sum << ',' << m.se_eng << ',' << m.se_u0 << ',' << m.se_nps
     << ',' << m.se_sum;
  return os.str();
}

}  // namespace prefshift
