#include "prefshift/rollout.hpp"

#include <stdexcept>

#include "prefshift/parallel.hpp"

namespace prefshift {

namespace {

/// Predictor wrapper that keeps the input window no longer than `cap` steps
/// by rebuilding from the most recent window when it would overflow
/// (cap <= 0 disables the cap).
class WindowedPredictor {
 public:
  WindowedPredictor(const SeqPredictor& proto, int cap)
      : pred_(proto.clone()), cap_(cap) {
    pred_->reset();
  }

  void observe(const Slate& slate, int choice) {
    window_.emplace_back(slate, choice);
    if (cap_ > 0 && static_cast<int>(window_.size()) > cap_) {
      window_.erase(window_.begin());
      pred_->reset();
      for (const auto& [s, x] : window_) pred_->observe(s, x);
    } else {
      pred_->observe(slate, choice);
    }
  }

  BeliefVec belief() { return pred_->belief(); }

 private:
  std::unique_ptr<SeqPredictor> pred_;
  int cap_;
  std::vector<std::pair<Slate, int>> window_;
};

}  // namespace

RolloutReport simulate_future(const SeqPredictor& predictor_proto, ChoiceModel& cm,
                              const std::vector<Slate>& slates, const std::vector<int>& choices,
                              Policy& policy, int horizon, int n_samples, Rng& rng,
                              int window_cap) {
  if (slates.size() != choices.size())
    throw std::invalid_argument("simulate_future: slates/choices length mismatch");
  const int start = static_cast<int>(slates.size());
  if (horizon < start) throw std::invalid_argument("simulate_future: horizon inside history");
  if (n_samples < 1) throw std::invalid_argument("simulate_future: n_samples < 1");

  const int n = cm.space().n();
  const int entries = horizon - start + 1;
  RolloutReport report;
  report.first_t = start;
  report.pref_beliefs.assign(entries, BeliefVec::Zero(n));
  report.choice_beliefs.assign(entries, Eigen::VectorXd::Zero(n));

  std::vector<Slate> sim_slates;
  std::vector<int> sim_choices;
  for (int b = 0; b < n_samples; ++b) {
    Rng branch_rng = rng.split(b);
    auto branch_policy = policy.clone();
    branch_policy->reset();
    WindowedPredictor pred(predictor_proto, window_cap);
    for (int t = 0; t < start; ++t) pred.observe(slates[t], choices[t]);
    sim_slates = slates;
    sim_choices = choices;
    for (int t = start; t <= horizon; ++t) {
      const BeliefVec belief = pred.belief();
      const Slate slate = branch_policy->next_slate(sim_slates, sim_choices, nullptr, branch_rng);
      const Eigen::VectorXd cd = cm.choice_belief(belief, slate);
      report.pref_beliefs[t - start] += belief;
      report.choice_beliefs[t - start] += cd;
      if (t < horizon) {
        const int choice = branch_rng.categorical(cd);
        pred.observe(slate, choice);
        sim_slates.push_back(slate);
        sim_choices.push_back(choice);
      }
    }
  }
  for (auto& b : report.pref_beliefs) b /= n_samples;
  for (auto& c : report.choice_beliefs) c /= n_samples;
  return report;
}

RolloutReport simulate_counterfactual(const Trajectory& traj, Policy& policy,
                                      const SequenceModel& initial_model,
                                      const SequenceModel& ctf_model, const PrefSpace& space,
                                      ChoiceModel& cm, int t_target, int n_samples, Rng& rng) {
  const BeliefVec init = corrected_initial_belief(initial_model, space, cm, traj.slates,
                                                  traj.choices, traj.length());
  LearnedPredictor proto(ctf_model, space, init);
  RolloutReport report =
      simulate_future(proto, cm, {}, {}, policy, t_target, n_samples, rng, ctf_model.horizon());
  report.pref_beliefs[0] = init;
  return report;
}

RolloutReport simulate_counterfactual_oracle(const Trajectory& traj, Policy& policy,
                                             NhmmEngine& engine, ChoiceModel& cm, int t_target,
                                             int n_samples, Rng& rng) {
  const BeliefVec init = engine.smooth_initial(traj.slates, traj.choices);
  OraclePredictor proto(engine, init);
  RolloutReport report = simulate_future(proto, cm, {}, {}, policy, t_target, n_samples, rng, 0);
  report.pref_beliefs[0] = init;
  return report;
}

GroundTruthUserSim::GroundTruthUserSim(const PrefSpace& space, const UserParams& params)
    : space_(space), params_(params) {
  params_.validate(space_);
}

void GroundTruthUserSim::reset(Rng& rng) { state_ = sample_initial_state(space_, params_, rng); }

int GroundTruthUserSim::sample_choice(const Slate& slate, Rng& rng) {
  StepOutcome out = step_user(space_, params_, state_, slate, rng);
  state_ = out.next_state;
  return out.choice;
}

std::unique_ptr<UserSim> GroundTruthUserSim::clone() const {
  return std::make_unique<GroundTruthUserSim>(*this);
}

ModelUserSim::ModelUserSim(const SequenceModel& future_model, const PrefSpace& space,
                           std::shared_ptr<ChoiceModel> cm)
    : predictor_(future_model, space), cm_(std::move(cm)) {}

void ModelUserSim::reset(Rng&) { predictor_.reset(); }

int ModelUserSim::sample_choice(const Slate& slate, Rng& rng) {
  const Eigen::VectorXd cd = cm_->choice_belief(predictor_.belief(), slate);
  const int choice = rng.categorical(cd);
  predictor_.observe(slate, choice);
  return choice;
}

std::unique_ptr<UserSim> ModelUserSim::clone() const {
  return std::make_unique<ModelUserSim>(*this);
}

RolloutTrace roll_trajectory(Policy& policy, UserSim& user, EstimatorStack& est, ChoiceModel& cm,
                             int horizon, bool penalized, double nu1, double nu2, Rng& rng) {
  const PrefSpace& space = cm.space();
  RolloutTrace trace;
  trace.steps.reserve(horizon);
  policy.reset();
  user.reset(rng);
  est.reset();
  if (user.true_pref()) trace.traj.gt_prefs.emplace();
  for (int t = 0; t < horizon; ++t) {
    RolloutStep step;
    step.est = est.before_step();
    step.slate = policy.next_slate(trace.traj.slates, trace.traj.choices, &step.est, rng);
    step.true_pref = user.true_pref();
    step.choice = user.sample_choice(step.slate, rng);
    step.choice_dist = cm.choice_belief(step.est.filtering, step.slate);
    step.eng = cross_engagement(space, step.choice_dist, step.est.filtering);
    step.u0 = cross_engagement(space, step.choice_dist, step.est.smoothing_u0);
    step.nps = cross_engagement(space, step.choice_dist, step.est.nps);
    step.reward = step.eng + (penalized ? nu1 * step.u0 + nu2 * step.nps : 0.0);
    est.observe(step.slate, step.choice);
    trace.traj.slates.push_back(step.slate);
    trace.traj.choices.push_back(step.choice);
    if (step.true_pref) trace.traj.gt_prefs->push_back(*step.true_pref);
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

std::vector<Trajectory> generate_dataset(const PrefSpace& space, const UserParams& params,
                                         int n_traj, int horizon, Rng& rng) {
  if (n_traj <= 0 || horizon <= 0)
    throw std::invalid_argument("generate_dataset: sizes must be positive");
  auto policy_a = make_slate_set_policy(space);
  auto policy_b = make_near_random_policy(space);
  std::vector<Trajectory> out(n_traj);
  parallel_for(n_traj, [&](int i) {
    Rng traj_rng = rng.split(i);
    auto policy = (i % 2 == 0) ? policy_a->clone() : policy_b->clone();
    policy->reset();
    GroundTruthUserSim user(space, params);
    user.reset(traj_rng);
    Trajectory traj;
    traj.user_id = i;
    traj.policy_id = policy->id();
    traj.gt_prefs.emplace();
    for (int t = 0; t < horizon; ++t) {
      const Slate slate = policy->next_slate(traj.slates, traj.choices, nullptr, traj_rng);
      traj.gt_prefs->push_back(*user.true_pref());
      const int choice = user.sample_choice(slate, traj_rng);
      traj.slates.push_back(slate);
      traj.choices.push_back(choice);
    }
    out[i] = std::move(traj);
  });
  return out;
}

Eigen::MatrixXd cohort_heatmap(Policy& policy, const PrefSpace& space, const UserParams& params,
                               NhmmEngine& engine, ChoiceModel& cm, int n_users, int horizon,
                               Rng& rng) {
  const int n = space.n();
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, horizon + 1);
  std::vector<std::vector<int>> paths(n_users);
  parallel_for(n_users, [&](int i) {
    Rng user_rng = rng.split(i);
    auto pol = policy.clone();
    pol->reset();
    GroundTruthUserSim user(space, params);
    user.reset(user_rng);
    OracleEstimators est(engine);
    const bool wants_est = pol->needs_estimates();
    std::vector<int>& prefs = paths[i];
    Trajectory traj;
    for (int t = 0; t < horizon; ++t) {
      StepEstimates e;
      if (wants_est) e = est.before_step();
      const Slate slate =
          pol->next_slate(traj.slates, traj.choices, wants_est ? &e : nullptr, user_rng);
      prefs.push_back(*user.true_pref());
      const int choice = user.sample_choice(slate, user_rng);
      if (wants_est) est.observe(slate, choice);
      traj.slates.push_back(slate);
      traj.choices.push_back(choice);
    }
    prefs.push_back(*user.true_pref());
  });
  for (const auto& prefs : paths)
    for (int t = 0; t <= horizon; ++t) counts(prefs[t], t) += 1.0;
  return counts / static_cast<double>(n_users);
}

}  // namespace prefshift
