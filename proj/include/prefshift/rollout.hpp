#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "prefshift/estimators.hpp"
#include "prefshift/metrics.hpp"
#include "prefshift/pref_model.hpp"
#include "prefshift/policy.hpp"
#include "prefshift/trajectory.hpp"

namespace prefshift {

/// Per-timestep preference beliefs and choice categoricals averaged over
/// Monte-Carlo futures; entry i corresponds to timestep first_t + i.
struct RolloutReport {
  int first_t = 0;
  std::vector<BeliefVec> pref_beliefs;
  std::vector<Eigen::VectorXd> choice_beliefs;
};

/// Monte-Carlo future simulation: starting from an observed history, repeat
/// (predict belief, sample policy slate, imagine a choice through the choice
/// model, append to the simulated history) out to `horizon`, and average the
/// per-timestep beliefs across `n_samples` futures. With an empty history the
/// first simulated step bootstraps from the predictor's prior. Input windows
/// are capped at the model horizon by dropping the oldest steps.
RolloutReport simulate_future(const SeqPredictor& predictor_proto, ChoiceModel& cm,
                              const std::vector<Slate>& slates, const std::vector<int>& choices,
                              Policy& policy, int horizon, int n_samples, Rng& rng,
                              int window_cap = 0);

/// Counterfactual simulation: recover the corrected initial-preference
/// belief from the observed trajectory, condition the counterfactual
/// predictor on it, and simulate from scratch under `policy` out to t_target.
/// The report covers t = 0..t_target and its first belief is the corrected
/// initial belief itself.
RolloutReport simulate_counterfactual(const Trajectory& traj, Policy& policy,
                                      const SequenceModel& initial_model,
                                      const SequenceModel& ctf_model, const PrefSpace& space,
                                      ChoiceModel& cm, int t_target, int n_samples, Rng& rng);

/// Oracle-backed variant (exact smoothing + exact conditioned rollout
/// through the predictor interface) for consistency checks.
RolloutReport simulate_counterfactual_oracle(const Trajectory& traj, Policy& policy,
                                             NhmmEngine& engine, ChoiceModel& cm, int t_target,
                                             int n_samples, Rng& rng);

/// The user side of a rollout: real simulated users in oracle mode, the
/// learned preference model imagining choices in simulation mode.
class UserSim {
 public:
  virtual ~UserSim() = default;
  virtual void reset(Rng& rng) = 0;
  /// Sample the choice for the offered slate and advance internal state.
  virtual int sample_choice(const Slate& slate, Rng& rng) = 0;
  virtual std::optional<int> true_pref() const { return std::nullopt; }
  virtual std::unique_ptr<UserSim> clone() const = 0;
};

class GroundTruthUserSim final : public UserSim {
 public:
  GroundTruthUserSim(const PrefSpace& space, const UserParams& params);
  void reset(Rng& rng) override;
  int sample_choice(const Slate& slate, Rng& rng) override;
  std::optional<int> true_pref() const override { return state_.pref; }
  std::unique_ptr<UserSim> clone() const override;

 private:
  PrefSpace space_;
  UserParams params_;
  UserState state_;
};

/// Imagined user: choices sampled from the future model's predicted choice
/// distribution (Algorithm 3's simulation mode).
class ModelUserSim final : public UserSim {
 public:
  ModelUserSim(const SequenceModel& future_model, const PrefSpace& space,
               std::shared_ptr<ChoiceModel> cm);
  void reset(Rng& rng) override;
  int sample_choice(const Slate& slate, Rng& rng) override;
  std::unique_ptr<UserSim> clone() const override;

 private:
  LearnedPredictor predictor_;
  std::shared_ptr<ChoiceModel> cm_;
};

struct RolloutStep {
  Slate slate;
  int choice = 0;
  StepEstimates est;             // before-step estimates
  Eigen::VectorXd choice_dist;   // analytic marginal under est.filtering
  double eng = 0, u0 = 0, nps = 0;
  double reward = 0;             // training reward (penalized or plain)
  std::optional<int> true_pref;  // oracle mode only
};

struct RolloutTrace {
  std::vector<RolloutStep> steps;
  Trajectory traj;
};

/// One trajectory for RL training / evaluation: per step, compute the belief
/// estimates, let the policy pick a slate, sample the user choice, and record
/// the analytic reward terms (plain engagement, or the nu-weighted penalized
/// sum).
RolloutTrace roll_trajectory(Policy& policy, UserSim& user, EstimatorStack& est, ChoiceModel& cm,
                             int horizon, bool penalized, double nu1, double nu2, Rng& rng);

/// Appendix-G logging dataset: half the users under the uniform-over-72-slates
/// policy, half under the 80/20 near-random policy (alternating by user id so
/// both the 7.5k train and 2.5k validation splits are exactly balanced), with
/// ground-truth preferences recorded.
std::vector<Trajectory> generate_dataset(const PrefSpace& space, const UserParams& params,
                                         int n_traj, int horizon, Rng& rng);

constexpr int kDefaultTrainSplit = 7500;

/// Cohort preference heatmap: column t is the empirical distribution of true
/// preferences at timestep t across n_users rolled under `policy`
/// (n x (horizon+1), each column a simplex).
Eigen::MatrixXd cohort_heatmap(Policy& policy, const PrefSpace& space, const UserParams& params,
                               NhmmEngine& engine, ChoiceModel& cm, int n_users, int horizon,
                               Rng& rng);

}  // namespace prefshift
