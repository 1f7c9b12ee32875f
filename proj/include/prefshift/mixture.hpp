#pragma once

#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "prefshift/policy.hpp"
#include "prefshift/user.hpp"

namespace prefshift {

/// K-component circular-mixture parameterization of a preference belief:
/// von Mises components with a mean angle, a concentration and a mixing
/// weight each.
struct MixtureComponent {
  double mean_deg = 0.0;
  double concentration = 1.0;
  double weight = 1.0;
};

struct MixtureBelief {
  std::vector<MixtureComponent> components;
  void validate() const;
};

constexpr double kKappaFloor = 1e-3;
constexpr double kKappaCap = 1e3;

/// Evaluate the mixture at the n bin centers and renormalize. Each component
/// is normalized over the bins (a discrete von Mises) before mixing, which
/// keeps the result an exact simplex for any concentration and avoids Bessel
/// functions; it matches the continuous normalization up to discretization.
BeliefVec density_at_bins(const PrefSpace& space, const MixtureBelief& belief);

/// Marginalize a preference belief through the assumed choice model:
/// p(x | slate) = sum_u belief(u) * P(x | slate, u, beta_c(u)).
Eigen::VectorXd choice_belief(const PrefSpace& space, const UserParams& assumed_params,
                              const BeliefVec& belief, const Slate& slate);

/// Multiply a belief over the initial preference by the timestep-0 choice
/// likelihood and renormalize (recovers the full smoothing posterior from the
/// later-context prediction).
BeliefVec bayes_correct_initial(const PrefSpace& space, const UserParams& assumed_params,
                                const BeliefVec& belief, const Slate& slate0, int choice0);

/// Per-slate choice-matrix cache for an assumed (possibly mis-specified)
/// choice model. Compute-once, read-many; safe to share across workers.
class ChoiceModel {
 public:
  ChoiceModel(const PrefSpace& space, UserParams assumed_params);

  const PrefSpace& space() const { return space_; }
  const UserParams& params() const { return params_; }

  /// matrix(u, x) = P(x | slate, u, beta_c(u)).
  const Eigen::MatrixXd& matrix_for(const Slate& slate);

  Eigen::VectorXd choice_belief(const BeliefVec& belief, const Slate& slate);

  /// Likelihood column P(choice | slate, u) over preference bins u.
  Eigen::VectorXd likelihood(const Slate& slate, int choice);

 private:
  PrefSpace space_;
  UserParams params_;
  std::mutex mutex_;
  std::unordered_map<std::uint64_t,
                     std::vector<std::unique_ptr<std::pair<Eigen::VectorXd, Eigen::MatrixXd>>>>
      cache_;
};

}  // namespace prefshift
