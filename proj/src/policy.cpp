#include "prefshift/policy.hpp"

#include <stdexcept>

namespace prefshift {

MixtureSlatePolicy::MixtureSlatePolicy(std::vector<Slate> slates, Eigen::VectorXd weights,
                                       std::string id)
    : slates_(std::move(slates)), weights_(std::move(weights)), id_(std::move(id)) {
  if (slates_.empty() || weights_.size() != static_cast<int>(slates_.size()))
    throw std::invalid_argument("MixtureSlatePolicy: slates/weights mismatch");
  check_simplex(weights_, "MixtureSlatePolicy weights");
}

Slate MixtureSlatePolicy::next_slate(const std::vector<Slate>&, const std::vector<int>&,
                                     const StepEstimates*, Rng& rng) {
  return slates_[rng.categorical(weights_)];
}

std::optional<std::vector<std::pair<double, Slate>>> MixtureSlatePolicy::fixed_distribution()
    const {
  std::vector<std::pair<double, Slate>> dist;
  dist.reserve(slates_.size());
  for (std::size_t i = 0; i < slates_.size(); ++i) dist.emplace_back(weights_[i], slates_[i]);
  return dist;
}

std::vector<Slate> dataset_slate_prototypes(const PrefSpace& space) {
  std::vector<Slate> slates;
  slates.reserve(72);
  for (double std_deg : {30.0, 60.0})
    for (int mean = 0; mean < 360; mean += 10)
      slates.push_back(make_wrapped_gaussian_slate(space, mean, std_deg));
  return slates;
}

std::unique_ptr<Policy> make_slate_set_policy(const PrefSpace& space) {
  auto slates = dataset_slate_prototypes(space);
  const int m = static_cast<int>(slates.size());
  return std::make_unique<MixtureSlatePolicy>(
      std::move(slates), Eigen::VectorXd::Constant(m, 1.0 / m), "slate-set");
}

std::unique_ptr<Policy> make_near_random_policy(const PrefSpace& space) {
  auto slates = dataset_slate_prototypes(space);
  const int m = static_cast<int>(slates.size());
  Eigen::VectorXd weights = Eigen::VectorXd::Constant(m + 1, 0.2 / m);
  weights[0] = 0.8;
  std::vector<Slate> all;
  all.reserve(m + 1);
  all.push_back(uniform_slate(space));
  for (auto& s : slates) all.push_back(std::move(s));
  return std::make_unique<MixtureSlatePolicy>(std::move(all), std::move(weights), "near-random");
}

}  // namespace prefshift
