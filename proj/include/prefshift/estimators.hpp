#pragma once

#include <memory>
#include <vector>

#include "prefshift/nhmm.hpp"
#include "prefshift/pref_model.hpp"

namespace prefshift {

/// Online belief estimates over one trajectory: the three quantities policies
/// and penalty metrics consume each step (predictive filtering over the
/// current preference, smoothing over the initial preference, and the
/// natural-preference-shift counterfactual under the uniform-slate policy),
/// plus the full-evidence variants used after a trajectory completes.
class EstimatorStack {
 public:
  virtual ~EstimatorStack() = default;
  virtual void reset() = 0;
  /// Estimates given the observations so far (before the next slate).
  virtual StepEstimates before_step() = 0;
  virtual void observe(const Slate& slate, int choice) = 0;
  /// Posterior over u_0 given everything observed so far.
  virtual BeliefVec smoothing_full() = 0;
  /// Counterfactual NPS beliefs u_t^rnd for t = 0..horizon, rolled from
  /// smoothing_full under the uniform slate (constant-slate shortcut).
  virtual std::vector<BeliefVec> nps_path(int horizon) = 0;
  virtual std::unique_ptr<EstimatorStack> clone() const = 0;
};

class OracleEstimators final : public EstimatorStack {
 public:
  explicit OracleEstimators(NhmmEngine& engine);
  void reset() override;
  StepEstimates before_step() override;
  void observe(const Slate& slate, int choice) override;
  BeliefVec smoothing_full() override;
  std::vector<BeliefVec> nps_path(int horizon) override;
  std::unique_ptr<EstimatorStack> clone() const override;

 private:
  NhmmEngine* engine_;
  Slate uniform_;
  std::vector<Slate> slates_;
  std::vector<int> choices_;
  BeliefVec filtering_;
};

/// The learned stack: future model for filtering, initial model plus Bayes
/// correction for smoothing, conditioned counterfactual model with masked
/// choices and uniform slates for the NPS shortcut.
class LearnedEstimators final : public EstimatorStack {
 public:
  LearnedEstimators(const SequenceModel& future_model, const SequenceModel& initial_model,
                    const SequenceModel& ctf_model, const PrefSpace& space,
                    std::shared_ptr<ChoiceModel> cm);
  void reset() override;
  StepEstimates before_step() override;
  void observe(const Slate& slate, int choice) override;
  BeliefVec smoothing_full() override;
  std::vector<BeliefVec> nps_path(int horizon) override;
  std::unique_ptr<EstimatorStack> clone() const override;

 private:
  BeliefVec smoothing_upto(int prefix_len);
  const SequenceModel *pf_, *pi_, *pc_;
  PrefSpace space_;
  std::shared_ptr<ChoiceModel> cm_;
  Slate uniform_;
  std::vector<Slate> slates_;
  std::vector<int> choices_;
  Eigen::VectorXd pf_hidden_, pi_hidden_;
};

}  // namespace prefshift
