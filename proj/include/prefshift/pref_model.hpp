#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "prefshift/mixture.hpp"
#include "prefshift/nhmm.hpp"
#include "prefshift/nn.hpp"
#include "prefshift/trajectory.hpp"

namespace prefshift {

enum class ModelTask { kFuture, kInitial, kCounterfactual };

std::string task_name(ModelTask task);
ModelTask task_from_name(const std::string& name);

struct TrainConfig {
  double learning_rate = 3e-5;
  int batch_size = 500;
  int epochs = 100;
  int mixture_components = 4;
  int hidden = 64;
  std::string arch = "gru";
  double choice_mask_prob = 0.5;  // counterfactual task: fraction trained without choices
  void validate() const;
};

/// Recurrent preference-dynamics model: a GRU over per-step encodings of
/// (slate, choice) pairs with a mixture-of-von-Mises output head. One model
/// instance per task:
///   future          P(u_{t+1} | s_{0:t}, x_{0:t})
///   initial         P(u_0 | s_{1:t}, x_{1:t})
///   counterfactual  P(u_{k+1} | b(u_0), s_{0:k}, x_{0:k})
/// The counterfactual task consumes an initial-preference belief as an extra
/// conditioning channel that seeds the initial hidden state.
class SequenceModel {
 public:
  SequenceModel() = default;
  static SequenceModel create(ModelTask task, int n_bins, int horizon, int hidden,
                              int mixture_components, Rng& rng);

  ModelTask task() const { return task_; }
  int n_bins() const { return n_bins_; }
  int horizon() const { return horizon_; }
  int hidden() const { return hidden_; }
  int mixture_components() const { return mixture_components_; }
  int input_dim() const { return 2 * n_bins_ + 1; }

  nn::ParamSet& params() { return params_; }
  const nn::ParamSet& params() const { return params_; }

  /// Incremental inference state.
  Eigen::VectorXd initial_hidden(const BeliefVec* cond) const;
  void advance(Eigen::VectorXd& hidden, const Slate& slate, int choice) const;  // choice -1 = masked
  MixtureBelief mixture_at(const Eigen::VectorXd& hidden) const;

  /// Per-step input encoding: [slate, choice one-hot (zeroed when masked),
  /// choice-present flag].
  Eigen::VectorXd encode_input(const Slate& slate, int choice) const;

  std::string to_json_string() const;
  static SequenceModel from_json_string(const std::string& text);
  void save(const std::string& path) const;
  static SequenceModel load(const std::string& path);

 private:
  ModelTask task_ = ModelTask::kFuture;
  int n_bins_ = 0, horizon_ = 0, hidden_ = 0, mixture_components_ = 0;
  nn::ParamSet params_;
};

/// Decoded head outputs for a whole batch on the autodiff tape; exposed for
/// training and gradient checks.
struct ModelTapeForward {
  std::vector<int> param_nodes;   // aligned with ParamSet order
  std::vector<int> belief_nodes;  // one (batch x n) simplex per head position
  int loss_node = -1;             // scalar mean NLL
};

/// One training example: consumed inputs, conditioning vector and the
/// per-head-position likelihood columns of the observed choices under the
/// assumed choice model.
struct SeqExample {
  std::vector<Eigen::VectorXd> inputs;
  Eigen::VectorXd cond;
  std::vector<Eigen::VectorXd> loss_cols;
};

SeqExample make_example(const SequenceModel& model, ChoiceModel& cm, const Trajectory& traj,
                        bool mask_choices, const BeliefVec* cond);

/// Batched tape forward + mean choice NLL over a same-length batch.
ModelTapeForward model_tape_forward(nn::Tape& tape, const SequenceModel& model,
                                    const std::vector<const SeqExample*>& batch);

/// Predicted preference beliefs made incremental: observe() appends one
/// (slate, choice) step; belief() is the current prediction target (the next
/// preference for future/counterfactual models, the initial preference for
/// initial models and oracle smoothing).
class SeqPredictor {
 public:
  virtual ~SeqPredictor() = default;
  virtual void reset() = 0;
  virtual void observe(const Slate& slate, int choice) = 0;
  virtual BeliefVec belief() = 0;
  virtual std::unique_ptr<SeqPredictor> clone() const = 0;
};

class LearnedPredictor final : public SeqPredictor {
 public:
  LearnedPredictor(const SequenceModel& model, const PrefSpace& space,
                   std::optional<BeliefVec> cond = std::nullopt);
  void reset() override;
  void observe(const Slate& slate, int choice) override;
  BeliefVec belief() override;
  std::unique_ptr<SeqPredictor> clone() const override;

 private:
  const SequenceModel* model_;
  PrefSpace space_;
  std::optional<BeliefVec> cond_;
  Eigen::VectorXd hidden_;
};

/// Exact-NHMM predictor: filtering from the environment prior, or a forward
/// rollout from a supplied initial belief (the oracle counterpart of the
/// conditioned counterfactual model). Masked choices are marginalized
/// exactly.
class OraclePredictor final : public SeqPredictor {
 public:
  explicit OraclePredictor(NhmmEngine& engine, std::optional<BeliefVec> init = std::nullopt);
  void reset() override;
  void observe(const Slate& slate, int choice) override;
  BeliefVec belief() override { return belief_; }
  std::unique_ptr<SeqPredictor> clone() const override;

 private:
  NhmmEngine* engine_;
  std::optional<BeliefVec> init_;
  BeliefVec belief_;
};

class UniformPredictor final : public SeqPredictor {
 public:
  explicit UniformPredictor(int n) : belief_(BeliefVec::Constant(n, 1.0 / n)) {}
  void reset() override {}
  void observe(const Slate&, int) override {}
  BeliefVec belief() override { return belief_; }
  std::unique_ptr<SeqPredictor> clone() const override {
    return std::make_unique<UniformPredictor>(*this);
  }

 private:
  BeliefVec belief_;
};

/// Train a sequence model on observed choices: the predicted belief is pushed
/// through the assumed choice model and scored against the choice actually
/// made. The counterfactual task additionally needs the already-trained
/// initial model to produce its conditioning beliefs.
SequenceModel train_sequence_model(ModelTask task, const std::vector<Trajectory>& train_set,
                                   const std::vector<Trajectory>& val_set, const PrefSpace& space,
                                   const UserParams& assumed_params, const TrainConfig& cfg,
                                   Rng& rng, const SequenceModel* initial_model = nullptr,
                                   std::ostream* log = nullptr);

/// Corrected initial-preference belief for a trajectory prefix: the initial
/// model applied to later context plus the timestep-0 Bayes correction.
BeliefVec corrected_initial_belief(const SequenceModel& initial_model, const PrefSpace& space,
                                   ChoiceModel& cm, const std::vector<Slate>& slates,
                                   const std::vector<int>& choices, int prefix_len);

struct PredictionMetrics {
  Eigen::VectorXd choice_nll_per_t, choice_acc_per_t, pref_nll_per_t, pref_acc_per_t;
  double choice_nll = 0, choice_acc = 0, pref_nll = 0, pref_acc = 0;
};

/// Per-position next-step prediction quality over a split: at position t the
/// predictor has seen steps 0..t-1 and is scored on (s_t, x_t) and, when
/// ground truth is present, on u_t.
PredictionMetrics evaluate_future_predictions(
    const std::function<std::unique_ptr<SeqPredictor>(const Trajectory&)>& make_predictor,
    const std::vector<Trajectory>& split, ChoiceModel& cm);

/// Initial-preference prediction quality: at position t the estimator has
/// seen later context (steps 1..t); choice metrics score (s_0, x_0) with the
/// uncorrected belief (no leakage), preference metrics compare the corrected
/// belief against the true u_0.
PredictionMetrics evaluate_initial_predictions(
    const std::function<BeliefVec(const Trajectory&, int upto, bool corrected)>& initial_belief,
    const std::vector<Trajectory>& split, ChoiceModel& cm);

}  // namespace prefshift
