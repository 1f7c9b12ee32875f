#pragma once

#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "prefshift/policy.hpp"
#include "prefshift/user.hpp"

namespace prefshift {

/// Per-slate operators of the non-homogeneous HMM over preference bins:
/// the observation (choice) matrix and the preference transition the slate
/// induces through the user's slate-belief update.
struct SlateOps {
  Eigen::VectorXd slate_probs;   // cache key payload (exact match check)
  Eigen::MatrixXd choice;       // choice(u, x) = P(x | slate, u) under beta_c(u)
  Eigen::MatrixXd transition;   // transition(u, u') = P(u' | u, update_slate_belief(slate))
};

/// Exact inference over user preferences with full access to the ground-truth
/// dynamics: filtering, smoothing of the initial preference, future
/// prediction under an alternate policy, and counterfactual rollouts.
///
/// The hidden state is the preference bin alone; the user's slate belief is a
/// deterministic function of the last slate, which is what collapses the
/// internal state to n discrete values and makes exact inference possible.
/// Policy slate probabilities are constant in the hidden preference given the
/// observed history, so they cancel in normalization and are omitted from the
/// observation likelihoods.
class NhmmEngine {
 public:
  NhmmEngine(const PrefSpace& space, UserParams params);

  const PrefSpace& space() const { return space_; }
  const UserParams& params() const { return params_; }

  /// Discretized wrapped-normal prior over the initial preference.
  const BeliefVec& prior() const { return prior_; }

  /// Compute-once, read-many cache of per-slate operators.
  const SlateOps& ops_for(const Slate& slate);

  /// Bayes update of a preference belief with one observed (slate, choice).
  BeliefVec filter_step(const BeliefVec& belief, const Slate& slate, int choice);

  /// Push a belief through a transition operator.
  static BeliefVec predict_step(const BeliefVec& belief, const Eigen::MatrixXd& transition);

  /// Alternating filter/predict over an observed trajectory; returns the
  /// belief over the preference at the first unobserved timestep. An empty
  /// trajectory returns the prior.
  BeliefVec filter_sequence(const std::vector<Slate>& slates, const std::vector<int>& choices);

  /// Forward-backward posterior over the initial preference given the whole
  /// observed trajectory. include_first_likelihood=false leaves out the
  /// timestep-0 observation (the quantity the learned initial-preference
  /// model is trained on before Bayes correction).
  BeliefVec smooth_initial(const std::vector<Slate>& slates, const std::vector<int>& choices,
                           bool include_first_likelihood = true);

  /// Beliefs over future preferences u_t for t = T+1..horizon if `policy`
  /// were deployed after the observed trajectory (observed steps 0..T).
  /// Exact for policies with a fixed slate distribution; Monte-Carlo over
  /// sampled slates/choices with exact per-branch conditioning otherwise.
  std::vector<BeliefVec> predict_future(const std::vector<Slate>& slates,
                                        const std::vector<int>& choices, Policy& policy,
                                        int horizon, int n_samples, Rng& rng);

  /// Belief over the preference the user would have held at t_target had
  /// `policy` been deployed from the very first interaction: smoothing of the
  /// initial preference followed by a forward rollout under the policy.
  BeliefVec counterfactual(const std::vector<Slate>& slates, const std::vector<int>& choices,
                           Policy& policy, int t_target, int n_samples, Rng& rng);

  /// Expected transition operator under a fixed slate distribution.
  Eigen::MatrixXd averaged_transition(const std::vector<std::pair<double, Slate>>& dist);

 private:
  BeliefVec rollout_marginal(const BeliefVec& start, Policy& policy,
                             const std::vector<Slate>& base_slates,
                             const std::vector<int>& base_choices, int n_steps, int n_samples,
                             Rng& rng, std::vector<BeliefVec>* per_step);

  PrefSpace space_;
  UserParams params_;
  BeliefVec prior_;
  std::mutex cache_mutex_;
  std::unordered_map<std::uint64_t, std::vector<std::unique_ptr<SlateOps>>> cache_;
};

}  // namespace prefshift
