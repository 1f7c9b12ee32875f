#include "prefshift/estimators.hpp"

namespace prefshift {

OracleEstimators::OracleEstimators(NhmmEngine& engine)
    : engine_(&engine), uniform_(uniform_slate(engine.space())) {
  reset();
}

void OracleEstimators::reset() {
  slates_.clear();
  choices_.clear();
  filtering_ = engine_->prior();
}

StepEstimates OracleEstimators::before_step() {
  StepEstimates est;
  est.filtering = filtering_;
  est.smoothing_u0 = smoothing_full();
  const int t = static_cast<int>(slates_.size());
  BeliefVec nps = est.smoothing_u0;
  const Eigen::MatrixXd& unif_t = engine_->ops_for(uniform_).transition;
  for (int k = 0; k < t; ++k) nps = NhmmEngine::predict_step(nps, unif_t);
  est.nps = nps;
  return est;
}

void OracleEstimators::observe(const Slate& slate, int choice) {
  const SlateOps& ops = engine_->ops_for(slate);
  filtering_ = NhmmEngine::predict_step(engine_->filter_step(filtering_, slate, choice),
                                        ops.transition);
  slates_.push_back(slate);
  choices_.push_back(choice);
}

BeliefVec OracleEstimators::smoothing_full() {
  return engine_->smooth_initial(slates_, choices_);
}

std::vector<BeliefVec> OracleEstimators::nps_path(int horizon) {
  std::vector<BeliefVec> path;
  path.reserve(horizon + 1);
  BeliefVec b = smoothing_full();
  path.push_back(b);
  const Eigen::MatrixXd& unif_t = engine_->ops_for(uniform_).transition;
  for (int t = 1; t <= horizon; ++t) {
    b = NhmmEngine::predict_step(b, unif_t);
    path.push_back(b);
  }
  return path;
}

std::unique_ptr<EstimatorStack> OracleEstimators::clone() const {
  return std::make_unique<OracleEstimators>(*this);
}

LearnedEstimators::LearnedEstimators(const SequenceModel& future_model,
                                     const SequenceModel& initial_model,
                                     const SequenceModel& ctf_model, const PrefSpace& space,
                                     std::shared_ptr<ChoiceModel> cm)
    : pf_(&future_model),
      pi_(&initial_model),
      pc_(&ctf_model),
      space_(space),
      cm_(std::move(cm)),
      uniform_(uniform_slate(space)) {
  if (pf_->task() != ModelTask::kFuture || pi_->task() != ModelTask::kInitial ||
      pc_->task() != ModelTask::kCounterfactual)
    throw std::invalid_argument("LearnedEstimators: model/task mismatch");
  reset();
}

void LearnedEstimators::reset() {
  slates_.clear();
  choices_.clear();
  pf_hidden_ = pf_->initial_hidden(nullptr);
  pi_hidden_ = pi_->initial_hidden(nullptr);
}

BeliefVec LearnedEstimators::smoothing_upto(int prefix_len) {
  BeliefVec belief = density_at_bins(space_, pi_->mixture_at(pi_hidden_));
  if (prefix_len >= 1)
    belief = bayes_correct_initial(space_, cm_->params(), belief, slates_[0], choices_[0]);
  return belief;
}

StepEstimates LearnedEstimators::before_step() {
  StepEstimates est;
  est.filtering = density_at_bins(space_, pf_->mixture_at(pf_hidden_));
  const int t = static_cast<int>(slates_.size());
  est.smoothing_u0 = smoothing_upto(t);
  // NPS shortcut: the conditioned model fed t uniform slates with choices
  // marginalized out.
  if (t == 0) {
    est.nps = est.smoothing_u0;
  } else {
    Eigen::VectorXd h = pc_->initial_hidden(&est.smoothing_u0);
    for (int k = 0; k < t; ++k) pc_->advance(h, uniform_, -1);
    est.nps = density_at_bins(space_, pc_->mixture_at(h));
  }
  return est;
}

void LearnedEstimators::observe(const Slate& slate, int choice) {
  pf_->advance(pf_hidden_, slate, choice);
  // The initial model consumes later context only (steps 1..t).
  if (!slates_.empty()) pi_->advance(pi_hidden_, slate, choice);
  slates_.push_back(slate);
  choices_.push_back(choice);
}

BeliefVec LearnedEstimators::smoothing_full() {
  return smoothing_upto(static_cast<int>(slates_.size()));
}

std::vector<BeliefVec> LearnedEstimators::nps_path(int horizon) {
  std::vector<BeliefVec> path;
  path.reserve(horizon + 1);
  const BeliefVec init = smoothing_full();
  path.push_back(init);
  Eigen::VectorXd h = pc_->initial_hidden(&init);
  for (int t = 1; t <= horizon; ++t) {
    pc_->advance(h, uniform_, -1);
    path.push_back(density_at_bins(space_, pc_->mixture_at(h)));
  }
  return path;
}

std::unique_ptr<EstimatorStack> LearnedEstimators::clone() const {
  return std::make_unique<LearnedEstimators>(*this);
}

}  // namespace prefshift
