#include "prefshift/nhmm.hpp"

#include <cstring>
#include <stdexcept>

namespace prefshift {

namespace {

std::uint64_t hash_probs(const Eigen::VectorXd& v) {
  // FNV-1a over the raw bytes; exact-match verification happens on lookup.
  std::uint64_t h = 1469598103934665603ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
  for (std::size_t i = 0; i < sizeof(double) * v.size(); ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

NhmmEngine::NhmmEngine(const PrefSpace& space, UserParams params)
    : space_(space), params_(std::move(params)) {
  params_.validate(space_);
  prior_ = initial_pref_distribution(space_, params_);
}

const SlateOps& NhmmEngine::ops_for(const Slate& slate) {
  check_simplex(slate.probs, "NhmmEngine slate");
  const std::uint64_t key = hash_probs(slate.probs);
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto& bucket = cache_[key];
  for (const auto& ops : bucket)
    if (ops->slate_probs == slate.probs) return *ops;
  auto ops = std::make_unique<SlateOps>();
  ops->slate_probs = slate.probs;
  ops->choice = choice_matrix(space_, params_, slate);
  ops->transition = preference_transition_matrix(space_, params_, update_slate_belief(slate));
  bucket.push_back(std::move(ops));
  return *bucket.back();
}

BeliefVec NhmmEngine::filter_step(const BeliefVec& belief, const Slate& slate, int choice) {
  space_.check_bin(choice);
  const SlateOps& ops = ops_for(slate);
  BeliefVec posterior = belief.cwiseProduct(ops.choice.col(choice));
  const double total = posterior.sum();
  if (total <= 0.0)
    throw std::runtime_error("filter_step: observed choice impossible under every preference");
  return posterior / total;
}

BeliefVec NhmmEngine::predict_step(const BeliefVec& belief, const Eigen::MatrixXd& transition) {
  return transition.transpose() * belief;
}

BeliefVec NhmmEngine::filter_sequence(const std::vector<Slate>& slates,
                                      const std::vector<int>& choices) {
  if (slates.size() != choices.size())
    throw std::invalid_argument("filter_sequence: slates/choices length mismatch");
  BeliefVec belief = prior_;
  for (std::size_t t = 0; t < slates.size(); ++t) {
    const SlateOps& ops = ops_for(slates[t]);
    belief = filter_step(belief, slates[t], choices[t]);
    belief = predict_step(belief, ops.transition);
  }
  return belief;
}

BeliefVec NhmmEngine::smooth_initial(const std::vector<Slate>& slates,
                                     const std::vector<int>& choices,
                                     bool include_first_likelihood) {
  if (slates.size() != choices.size())
    throw std::invalid_argument("smooth_initial: slates/choices length mismatch");
  const std::size_t len = slates.size();
  if (len == 0) return prior_;
  // Backward messages through the per-slate transitions, rescaled each step.
  BeliefVec back = BeliefVec::Ones(space_.n());
  for (std::size_t t = len - 1; t >= 1; --t) {
    const SlateOps& ops = ops_for(slates[t]);
    const BeliefVec weighted = ops.choice.col(choices[t]).cwiseProduct(back);
    back = ops_for(slates[t - 1]).transition * weighted;
    back /= back.sum();
  }
  BeliefVec post = prior_.cwiseProduct(back);
  if (include_first_likelihood)
    post = post.cwiseProduct(ops_for(slates[0]).choice.col(choices[0]));
  const double total = post.sum();
  if (total <= 0.0) throw std::runtime_error("smooth_initial: degenerate evidence");
  return post / total;
}

Eigen::MatrixXd NhmmEngine::averaged_transition(
    const std::vector<std::pair<double, Slate>>& dist) {
  Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(space_.n(), space_.n());
  double total = 0.0;
  for (const auto& [p, slate] : dist) {
    avg += p * ops_for(slate).transition;
    total += p;
  }
  if (std::abs(total - 1.0) > kSimplexTol)
    throw std::invalid_argument("averaged_transition: slate distribution not normalized");
  return avg;
}

BeliefVec NhmmEngine::rollout_marginal(const BeliefVec& start, Policy& policy,
                                       const std::vector<Slate>& base_slates,
                                       const std::vector<int>& base_choices, int n_steps,
                                       int n_samples, Rng& rng,
                                       std::vector<BeliefVec>* per_step) {
  if (per_step) per_step->assign(n_steps, BeliefVec::Zero(space_.n()));
  if (n_steps == 0) return start;

  if (auto dist = policy.fixed_distribution()) {
    const Eigen::MatrixXd avg = averaged_transition(*dist);
    BeliefVec belief = start;
    for (int k = 0; k < n_steps; ++k) {
      belief = predict_step(belief, avg);
      if (per_step) (*per_step)[k] = belief;
    }
    return belief;
  }

  if (policy.needs_estimates())
    throw std::invalid_argument(
        "NhmmEngine: Monte-Carlo inference over estimate-consuming policies is not supported");
  if (n_samples < 1) throw std::invalid_argument("rollout_marginal: n_samples < 1");

  BeliefVec acc = BeliefVec::Zero(space_.n());
  std::vector<Slate> sim_slates;
  std::vector<int> sim_choices;
  for (int b = 0; b < n_samples; ++b) {
    Rng branch_rng = rng.split(b);
    auto branch_policy = policy.clone();
    branch_policy->reset();
    sim_slates = base_slates;
    sim_choices = base_choices;
    BeliefVec belief = start;
    for (int k = 0; k < n_steps; ++k) {
      const Slate slate = branch_policy->next_slate(sim_slates, sim_choices, nullptr, branch_rng);
      const SlateOps& ops = ops_for(slate);
      const Eigen::VectorXd choice_marginal = ops.choice.transpose() * belief;
      const int choice = branch_rng.categorical(choice_marginal);
      belief = predict_step(filter_step(belief, slate, choice), ops.transition);
      sim_slates.push_back(slate);
      sim_choices.push_back(choice);
      if (per_step) (*per_step)[k] += belief;
    }
    acc += belief;
  }
  if (per_step)
    for (auto& b : *per_step) b /= n_samples;
  return acc / n_samples;
}

std::vector<BeliefVec> NhmmEngine::predict_future(const std::vector<Slate>& slates,
                                                  const std::vector<int>& choices, Policy& policy,
                                                  int horizon, int n_samples, Rng& rng) {
  const int last_observed = static_cast<int>(slates.size()) - 1;
  if (horizon <= last_observed)
    throw std::invalid_argument("predict_future: horizon must exceed the observed trajectory");
  const BeliefVec base = filter_sequence(slates, choices);
  std::vector<BeliefVec> out;
  out.reserve(horizon - last_observed);
  out.push_back(base);
  const int extra = horizon - last_observed - 1;
  if (extra > 0) {
    std::vector<BeliefVec> per_step;
    rollout_marginal(base, policy, slates, choices, extra, n_samples, rng, &per_step);
    for (auto& b : per_step) out.push_back(std::move(b));
  }
  return out;
}

BeliefVec NhmmEngine::counterfactual(const std::vector<Slate>& slates,
                                     const std::vector<int>& choices, Policy& policy,
                                     int t_target, int n_samples, Rng& rng) {
  if (t_target < 0) throw std::invalid_argument("counterfactual: t_target < 0");
  const BeliefVec initial = smooth_initial(slates, choices);
  return rollout_marginal(initial, policy, {}, {}, t_target, n_samples, rng, nullptr);
}

}  // namespace prefshift
