#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "prefshift/nn.hpp"
#include "prefshift/rollout.hpp"

namespace prefshift {

/// The recommender's action space: 6 wrapped-Gaussian slates with evenly
/// spaced means 60° apart and standard deviation 60°.
std::vector<Slate> action_space_slates(const PrefSpace& space);

struct PGConfig {
  int batch_size = 1200;        // environment steps per iteration
  int minibatch_size = 600;     // environment steps per minibatch
  int workers = 4;
  double learning_rate = 0.005;
  int updates_per_minibatch = 50;
  double policy_clip = 0.5;
  double value_clip = 50.0;
  double value_loss_coeff = 8.0;
  double gamma = 0.99;
  bool penalized = false;
  double nu1 = 1.0;
  double nu2 = 1.0;
  int iterations = 60;
  int horizon = 10;
  int hidden = 64;
  double entropy_coeff = 0.0;
  bool standardize_advantages = true;
  void validate() const;
};

/// LSTM policy/value network over per-step observations
/// [current slate, previous choice, filtering, smoothing, NPS beliefs].
class RecurrentPolicyNet {
 public:
  RecurrentPolicyNet() = default;
  static RecurrentPolicyNet create(int obs_dim, int hidden, int n_actions, Rng& rng);

  int obs_dim() const { return obs_dim_; }
  int hidden() const { return hidden_; }
  int n_actions() const { return n_actions_; }
  nn::ParamSet& params() { return params_; }
  const nn::ParamSet& params() const { return params_; }

  struct State {
    Eigen::VectorXd h, c;
  };
  State initial_state() const;
  /// One step of the plain (inference) path; fills logits and value.
  void step(State& state, const Eigen::VectorXd& obs, Eigen::VectorXd& action_logits,
            double& value) const;

  std::string to_json_string() const;
  static RecurrentPolicyNet from_json_string(const std::string& text);
  void save(const std::string& path) const;
  static RecurrentPolicyNet load(const std::string& path);

 private:
  int obs_dim_ = 0, hidden_ = 0, n_actions_ = 0;
  nn::ParamSet params_;
};

/// Observation encoding shared by acting and training.
Eigen::VectorXd encode_policy_obs(const PrefSpace& space, const Slate* prev_slate,
                                  int prev_choice, const StepEstimates& est);

/// Policy-interface adapter around the net: samples one of the 6 slates.
class LearnedSlatePolicy final : public Policy {
 public:
  LearnedSlatePolicy(const RecurrentPolicyNet& net, const PrefSpace& space, std::string id);
  void reset() override;
  Slate next_slate(const std::vector<Slate>& slates, const std::vector<int>& choices,
                   const StepEstimates* est, Rng& rng) override;
  bool needs_estimates() const override { return true; }
  std::unique_ptr<Policy> clone() const override;
  std::string id() const override { return id_; }

 private:
  const RecurrentPolicyNet* net_;
  PrefSpace space_;
  std::vector<Slate> actions_;
  RecurrentPolicyNet::State state_;
  std::string id_;
};

/// One sampled action with its log-probability, value estimate and updated
/// recurrent state (the plain acting path).
struct ActResult {
  int action = 0;
  double log_prob = 0.0;
  double value = 0.0;
};
ActResult act(const RecurrentPolicyNet& net, RecurrentPolicyNet::State& state,
              const Eigen::VectorXd& obs, Rng& rng);

/// Tape forward over a batch of fixed-length trajectories; returns per-step
/// log-probabilities of the taken actions, values and entropies as node ids.
struct PolicyTapeForward {
  std::vector<int> param_nodes;
  std::vector<int> logp_nodes;     // per step: (B x 1)
  std::vector<int> value_nodes;    // per step: (B x 1)
  std::vector<int> entropy_nodes;  // per step: (B x 1)
};
PolicyTapeForward policy_tape_forward(nn::Tape& tape, const RecurrentPolicyNet& net,
                                      const std::vector<Eigen::MatrixXd>& obs_per_step,
                                      const std::vector<Eigen::VectorXi>& actions_per_step);

/// Plain discounted returns (no bootstrapping); gamma = 0 reduces each
/// return to its immediate reward.
std::vector<double> discounted_returns(const std::vector<double>& rewards, double gamma);

/// Training curve entry per iteration.
struct TrainCurvePoint {
  int iteration = 0;
  double mean_return = 0, eng = 0, eng_u0 = 0, eng_nps = 0;
};

/// Clipped-surrogate policy-gradient training (plain discounted returns, no
/// GAE, clipped value loss). The environment is defined by the user
/// simulator, estimator stack and assumed choice model prototypes; rewards
/// follow the penalized objective when cfg.penalized is set.
RecurrentPolicyNet train_policy(const PGConfig& cfg, UserSim& user_proto,
                                EstimatorStack& est_proto, ChoiceModel& cm, Rng& rng,
                                std::vector<TrainCurvePoint>* curve = nullptr,
                                std::ostream* log = nullptr);

}  // namespace prefshift
