#include "prefshift/mixture.hpp"

#include <cmath>
#include <stdexcept>

namespace prefshift {

namespace {

std::uint64_t hash_probs(const Eigen::VectorXd& v) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
  for (std::size_t i = 0; i < sizeof(double) * v.size(); ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

void MixtureBelief::validate() const {
  if (components.empty()) throw std::invalid_argument("MixtureBelief: no components");
  double total = 0.0;
  for (const auto& c : components) {
    if (c.concentration <= 0.0) throw std::invalid_argument("MixtureBelief: concentration <= 0");
    if (c.weight < 0.0) throw std::invalid_argument("MixtureBelief: negative weight");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw std::invalid_argument("MixtureBelief: weights do not sum to 1");
}

BeliefVec density_at_bins(const PrefSpace& space, const MixtureBelief& belief) {
  belief.validate();
  const int n = space.n();
  BeliefVec out = BeliefVec::Zero(n);
  Eigen::VectorXd comp(n);
  for (const auto& c : belief.components) {
    const double mu = c.mean_deg * M_PI / 180.0;
    for (int i = 0; i < n; ++i) {
      const double theta = space.bin_center_deg(i) * M_PI / 180.0;
      comp[i] = std::exp(c.concentration * (std::cos(theta - mu) - 1.0));
    }
    out += c.weight * comp / comp.sum();
  }
  return out / out.sum();
}

Eigen::VectorXd choice_belief(const PrefSpace& space, const UserParams& assumed_params,
                              const BeliefVec& belief, const Slate& slate) {
  check_simplex(belief, "choice_belief belief");
  return choice_matrix(space, assumed_params, slate).transpose() * belief;
}

BeliefVec bayes_correct_initial(const PrefSpace& space, const UserParams& assumed_params,
                                const BeliefVec& belief, const Slate& slate0, int choice0) {
  check_simplex(belief, "bayes_correct_initial belief");
  space.check_bin(choice0);
  const Eigen::MatrixXd c = choice_matrix(space, assumed_params, slate0);
  BeliefVec post = belief.cwiseProduct(c.col(choice0));
  const double total = post.sum();
  if (total <= 0.0) throw std::runtime_error("bayes_correct_initial: degenerate evidence");
  return post / total;
}

ChoiceModel::ChoiceModel(const PrefSpace& space, UserParams assumed_params)
    : space_(space), params_(std::move(assumed_params)) {
  params_.validate(space_);
}

const Eigen::MatrixXd& ChoiceModel::matrix_for(const Slate& slate) {
  const std::uint64_t key = hash_probs(slate.probs);
  std::lock_guard<std::mutex> lock(mutex_);
  auto& bucket = cache_[key];
  for (const auto& entry : bucket)
    if (entry->first == slate.probs) return entry->second;
  bucket.push_back(std::make_unique<std::pair<Eigen::VectorXd, Eigen::MatrixXd>>(
      slate.probs, choice_matrix(space_, params_, slate)));
  return bucket.back()->second;
}

Eigen::VectorXd ChoiceModel::choice_belief(const BeliefVec& belief, const Slate& slate) {
  return matrix_for(slate).transpose() * belief;
}

Eigen::VectorXd ChoiceModel::likelihood(const Slate& slate, int choice) {
  space_.check_bin(choice);
  return matrix_for(slate).col(choice);
}

}  // namespace prefshift
