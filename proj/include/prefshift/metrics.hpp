#pragma once

#include <vector>

#include "prefshift/estimators.hpp"
#include "prefshift/policy.hpp"

namespace prefshift {

/// Cumulative engagement metrics of a policy evaluated against its own
/// induced preferences and against the two safe-shift baselines, plus their
/// standard errors across trajectories.
struct ShiftMetrics {
  double eng = 0, eng_u0 = 0, eng_nps = 0, sum = 0;
  double se_eng = 0, se_u0 = 0, se_nps = 0, se_sum = 0;
};

enum class EvalMode { kOracle, kEstimated };

struct EvalConfig {
  EvalMode mode = EvalMode::kOracle;
  int n_traj = 1000;
  int horizon = 10;
  double nu1 = 1.0;
  double nu2 = 1.0;
  void validate() const;
};

/// E[engagement] with the chosen item and the preference drawn independently
/// from the given distributions.
double cross_engagement(const PrefSpace& space, const Eigen::VectorXd& choice_dist,
                        const BeliefVec& safe_belief);

/// Distance between a policy's induced shift and a safe shift: the summed
/// per-step gap between cross-engagement under the policy's own beliefs and
/// under the safe beliefs, for the same choice distributions.
double shift_distance(const PrefSpace& space, const std::vector<Eigen::VectorXd>& choice_dists,
                      const std::vector<BeliefVec>& own_beliefs,
                      const std::vector<BeliefVec>& safe_beliefs);

/// Per-step penalized reward: engagement plus nu-weighted cross-engagement
/// under the initial-preference and NPS safe baselines.
double penalized_reward(const PrefSpace& space, const Eigen::VectorXd& choice_dist,
                        const BeliefVec& own_belief, const BeliefVec& u0_belief,
                        const BeliefVec& nps_belief, double nu1, double nu2);

class UserSim;  // rollout.hpp

/// Roll n_traj trajectories of `policy` against the provided user simulator
/// and estimator stack and accumulate the cumulative metrics. Expectations
/// are analytic over beliefs and choice distributions; the safe baselines use
/// the full-evidence smoothing and NPS counterfactual of each trajectory.
/// Parallel across trajectories with per-index rng streams; aggregation is in
/// index order, so results are identical at any worker count.
ShiftMetrics evaluate_policy(Policy& policy, UserSim& user_proto, EstimatorStack& est_proto,
                             ChoiceModel& cm, const EvalConfig& cfg, Rng& rng);

/// CSV row for the metrics tables.
std::string shift_metrics_csv_header();
std::string shift_metrics_csv_row(const std::string& policy_id, const std::string& training_mode,
                                  const std::string& eval_mode, const ShiftMetrics& m);

}  // namespace prefshift
