#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prefshift/env.hpp"
#include "prefshift/rng.hpp"

namespace prefshift {

/// Posterior over the n preference bins.
using BeliefVec = Eigen::VectorXd;

/// Belief features handed to recurrent policies at each step: predictive
/// filtering belief over the current preference, smoothing belief over the
/// initial preference, and the natural-preference-shift counterfactual.
struct StepEstimates {
  BeliefVec filtering;
  BeliefVec smoothing_u0;
  BeliefVec nps;
};

/// A recommender policy: maps the interaction history so far to the next
/// slate. Policies may be stateful across a trajectory (recurrent nets);
/// reset() starts a fresh trajectory and clone() provides independent
/// instances for parallel branches.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual void reset() {}

  /// est may be null for policies that do not consume belief features.
  virtual Slate next_slate(const std::vector<Slate>& slates, const std::vector<int>& choices,
                           const StepEstimates* est, Rng& rng) = 0;

  /// Non-empty iff the policy emits slates i.i.d. from a fixed distribution
  /// regardless of history; enables exact marginal inference.
  virtual std::optional<std::vector<std::pair<double, Slate>>> fixed_distribution() const {
    return std::nullopt;
  }

  virtual bool needs_estimates() const { return false; }
  virtual std::unique_ptr<Policy> clone() const = 0;
  virtual std::string id() const = 0;
};

/// The random recommender: always the uniform slate (the paper's natural
/// preference shift reference policy).
class RandomSlatePolicy final : public Policy {
 public:
  explicit RandomSlatePolicy(const PrefSpace& space) : slate_(uniform_slate(space)) {}
  Slate next_slate(const std::vector<Slate>&, const std::vector<int>&, const StepEstimates*,
                   Rng&) override {
    return slate_;
  }
  std::optional<std::vector<std::pair<double, Slate>>> fixed_distribution() const override {
    return std::vector<std::pair<double, Slate>>{{1.0, slate_}};
  }
  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<RandomSlatePolicy>(*this);
  }
  std::string id() const override { return "rnd"; }

 private:
  Slate slate_;
};

class ConstantSlatePolicy final : public Policy {
 public:
  ConstantSlatePolicy(Slate slate, std::string id) : slate_(std::move(slate)), id_(std::move(id)) {}
  Slate next_slate(const std::vector<Slate>&, const std::vector<int>&, const StepEstimates*,
                   Rng&) override {
    return slate_;
  }
  std::optional<std::vector<std::pair<double, Slate>>> fixed_distribution() const override {
    return std::vector<std::pair<double, Slate>>{{1.0, slate_}};
  }
  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<ConstantSlatePolicy>(*this);
  }
  std::string id() const override { return id_; }

 private:
  Slate slate_;
  std::string id_;
};

/// Samples i.i.d. from a fixed finite set of slates with given weights.
class MixtureSlatePolicy final : public Policy {
 public:
  MixtureSlatePolicy(std::vector<Slate> slates, Eigen::VectorXd weights, std::string id);
  Slate next_slate(const std::vector<Slate>&, const std::vector<int>&, const StepEstimates*,
                   Rng& rng) override;
  std::optional<std::vector<std::pair<double, Slate>>> fixed_distribution() const override;
  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<MixtureSlatePolicy>(*this);
  }
  std::string id() const override { return id_; }

 private:
  std::vector<Slate> slates_;
  Eigen::VectorXd weights_;
  std::string id_;
};

/// The 72 slate prototypes behind the logging policies: wrapped-Gaussian
/// slates with means 0°,10°,...,350° and standard deviations 30° and 60°.
std::vector<Slate> dataset_slate_prototypes(const PrefSpace& space);

/// Logging policy A: uniform over the 72 prototypes.
std::unique_ptr<Policy> make_slate_set_policy(const PrefSpace& space);

/// Logging policy B: the uniform slate 80% of the time, otherwise a random
/// prototype.
std::unique_ptr<Policy> make_near_random_policy(const PrefSpace& space);

}  // namespace prefshift
