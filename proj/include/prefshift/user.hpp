#pragma once

#include "prefshift/env.hpp"
#include "prefshift/rng.hpp"

namespace prefshift {

/// Parameters of the simulated ground-truth user.
///
/// The choice temperature is a field over preference space (beta_c_field);
/// beta_d is the temperature of the preference-choice logit; lambda trades
/// off valuing anticipated choices under the current vs the candidate
/// preference ("mindset flexibility").
struct UserParams {
  double lambda = 0.9;
  double beta_d = 96.0;
  Eigen::VectorXd beta_c_field;
  double init_pref_mean_deg = 130.0;
  double init_pref_std_deg = 20.0;

  void validate(const PrefSpace& space) const;
};

/// Choice-temperature field with local optima beta_c(80°)=1 and
/// beta_c(270°)=4: two wrapped-Gaussian bumps of width 40° over a floor of
/// 0.25, combined by pointwise max so the peak values are attained exactly.
Eigen::VectorXd default_beta_c_field(const PrefSpace& space);

/// Mis-specified variant for robustness experiments: peak heights swapped
/// (beta_c(80°)=4, beta_c(270°)=1).
Eigen::VectorXd swapped_beta_c_field(const PrefSpace& space);

UserParams default_user_params(const PrefSpace& space);

double beta_c_at(const UserParams& params, const PrefSpace& space, int pref_bin);

/// Conditional-logit item choice: p(x) ∝ slate[x] * exp(beta * cos(u, x)).
Eigen::VectorXd choice_distribution(const PrefSpace& space, int pref_bin, const Slate& slate,
                                    double beta);

/// Row u of the choice matrix is choice_distribution(u, slate, beta_c(u)).
Eigen::MatrixXd choice_matrix(const PrefSpace& space, const UserParams& params,
                              const Slate& slate);

/// Slate-belief update: the user expects future slates to look like the most
/// common items of the current one, b ∝ slate^3.
Slate update_slate_belief(const Slate& slate);

/// Value the user assigns to switching to preference u_next given the slate
/// belief: the anticipated next choice is drawn from the choice model under
/// u_next (slate = belief, temperature beta_c(u_next)), and that choice is
/// valued lambda-weighted under the current preference and (1-lambda) under
/// the candidate one.
double preference_value(const PrefSpace& space, const UserParams& params, int u_cur, int u_next,
                        const Slate& belief);

/// Softmax over candidate preferences of beta_d * preference_value.
Eigen::VectorXd preference_transition(const PrefSpace& space, const UserParams& params, int u_cur,
                                      const Slate& belief);

/// All rows of the preference transition at once (row = current preference).
/// Shared core for the NHMM transition operator; O(n^2) plus one n x n
/// product instead of n independent row computations.
Eigen::MatrixXd preference_transition_matrix(const PrefSpace& space, const UserParams& params,
                                             const Slate& belief);

/// Ground-truth user internal state: preference bin plus belief over future
/// slates.
struct UserState {
  int pref = 0;
  Slate slate_belief;
};

struct StepOutcome {
  int choice = 0;
  double reward = 0.0;  // engagement under the preference held at choice time
  UserState next_state;
};

/// One environment step: sample the item choice, collect (hidden) engagement,
/// update the slate belief from the received slate, then sample the next
/// preference.
StepOutcome step_user(const PrefSpace& space, const UserParams& params, const UserState& state,
                      const Slate& slate, Rng& rng);

/// Discretized wrapped-normal prior over the initial preference bin.
Eigen::VectorXd initial_pref_distribution(const PrefSpace& space, const UserParams& params);

/// Initial state: preference from the wrapped-normal prior, slate belief
/// matching the (uniform) content distribution.
UserState sample_initial_state(const PrefSpace& space, const UserParams& params, Rng& rng);

}  // namespace prefshift
