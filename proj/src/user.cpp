#include "prefshift/user.hpp"

#include <cmath>
#include <stdexcept>

namespace prefshift {

namespace {

double wrapped_degrees(double a, double b) {
  double d = std::abs(a - b);
  d = std::fmod(d, 360.0);
  return std::min(d, 360.0 - d);
}

Eigen::VectorXd bump_field(const PrefSpace& space, double floor, double peak_a_deg,
                           double height_a, double peak_b_deg, double height_b) {
  const double width = 40.0;
  const int n = space.n();
  Eigen::VectorXd field(n);
  for (int i = 0; i < n; ++i) {
    const double theta = space.bin_center_deg(i);
    const double da = wrapped_degrees(theta, peak_a_deg);
    const double db = wrapped_degrees(theta, peak_b_deg);
    const double bump_a = height_a * std::exp(-da * da / (2.0 * width * width));
    const double bump_b = height_b * std::exp(-db * db / (2.0 * width * width));
    field[i] = std::max(floor, std::max(bump_a, bump_b));
  }
  return field;
}

}  // namespace

void UserParams::validate(const PrefSpace& space) const {
  if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("UserParams: lambda not in [0,1]");
  if (beta_d < 0.0) throw std::invalid_argument("UserParams: beta_d must be non-negative");
  if (beta_c_field.size() != space.n())
    throw std::invalid_argument("UserParams: beta_c_field size mismatch");
  if (beta_c_field.minCoeff() <= 0.0)
    throw std::invalid_argument("UserParams: beta_c_field entries must be positive");
  if (init_pref_std_deg <= 0.0) throw std::invalid_argument("UserParams: init_pref_std_deg <= 0");
}

Eigen::VectorXd default_beta_c_field(const PrefSpace& space) {
  return bump_field(space, 0.25, 80.0, 1.0, 270.0, 4.0);
}

Eigen::VectorXd swapped_beta_c_field(const PrefSpace& space) {
  return bump_field(space, 0.25, 80.0, 4.0, 270.0, 1.0);
}

UserParams default_user_params(const PrefSpace& space) {
  UserParams p;
  p.beta_c_field = default_beta_c_field(space);
  return p;
}

double beta_c_at(const UserParams& params, const PrefSpace& space, int pref_bin) {
  space.check_bin(pref_bin);
  return params.beta_c_field[pref_bin];
}

Eigen::VectorXd choice_distribution(const PrefSpace& space, int pref_bin, const Slate& slate,
                                    double beta) {
  space.check_bin(pref_bin);
  check_simplex(slate.probs, "choice_distribution slate");
  const int n = space.n();
  Eigen::VectorXd p(n);
  // exp(beta * (cos - 1)) keeps the weights in (0, 1] for any beta.
  for (int x = 0; x < n; ++x)
    p[x] = slate.probs[x] * std::exp(beta * (space.cos_between(pref_bin, x) - 1.0));
  const double total = p.sum();
  if (total <= 0.0) throw std::runtime_error("choice_distribution: degenerate slate");
  return p / total;
}

Eigen::MatrixXd choice_matrix(const PrefSpace& space, const UserParams& params,
                              const Slate& slate) {
  const int n = space.n();
  Eigen::MatrixXd c(n, n);
  for (int u = 0; u < n; ++u)
    c.row(u) = choice_distribution(space, u, slate, params.beta_c_field[u]).transpose();
  return c;
}

Slate update_slate_belief(const Slate& slate) {
  check_simplex(slate.probs, "update_slate_belief slate");
  Eigen::VectorXd b = slate.probs.array().cube();
  const double total = b.sum();
  if (total <= 0.0) throw std::invalid_argument("update_slate_belief: all-zero slate");
  return Slate{b / total};
}

double preference_value(const PrefSpace& space, const UserParams& params, int u_cur, int u_next,
                        const Slate& belief) {
  space.check_bin(u_cur);
  const Eigen::VectorXd anticipated =
      choice_distribution(space, u_next, belief, params.beta_c_field[u_next]);
  double value = 0.0;
  for (int x = 0; x < space.n(); ++x)
    value += anticipated[x] * (params.lambda * space.cos_between(u_cur, x) +
                               (1.0 - params.lambda) * space.cos_between(u_next, x));
  return value;
}

Eigen::MatrixXd preference_transition_matrix(const PrefSpace& space, const UserParams& params,
                                             const Slate& belief) {
  const int n = space.n();
  // anticipated(u', x): choice distribution under candidate preference u'.
  const Eigen::MatrixXd anticipated = choice_matrix(space, params, belief);
  // own(u') = E[cos(u', x)], cross(u', u) = E[cos(u, x)] under anticipated(u', .).
  const Eigen::VectorXd own = (anticipated.array() * space.cos_matrix().array()).rowwise().sum();
  const Eigen::MatrixXd cross = anticipated * space.cos_matrix();
  // V(u, u') = lambda * cross(u', u) + (1 - lambda) * own(u').
  Eigen::MatrixXd logits =
      params.beta_d * (params.lambda * cross.transpose() +
                       (1.0 - params.lambda) * own.transpose().replicate(n, 1));
  Eigen::MatrixXd trans(n, n);
  for (int u = 0; u < n; ++u) {
    Eigen::VectorXd row = (logits.row(u).array() - logits.row(u).maxCoeff()).exp();
    trans.row(u) = row.transpose() / row.sum();
  }
  return trans;
}

Eigen::VectorXd preference_transition(const PrefSpace& space, const UserParams& params, int u_cur,
                                      const Slate& belief) {
  space.check_bin(u_cur);
  const int n = space.n();
  Eigen::VectorXd logits(n);
  for (int u_next = 0; u_next < n; ++u_next)
    logits[u_next] = params.beta_d * preference_value(space, params, u_cur, u_next, belief);
  Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
  return p / p.sum();
}

StepOutcome step_user(const PrefSpace& space, const UserParams& params, const UserState& state,
                      const Slate& slate, Rng& rng) {
  StepOutcome out;
  const Eigen::VectorXd choice_probs =
      choice_distribution(space, state.pref, slate, params.beta_c_field[state.pref]);
  out.choice = rng.categorical(choice_probs);
  out.reward = engagement(space, state.pref, out.choice);
  out.next_state.slate_belief = update_slate_belief(slate);
  const Eigen::VectorXd pref_probs =
      preference_transition(space, params, state.pref, out.next_state.slate_belief);
  out.next_state.pref = rng.categorical(pref_probs);
  return out;
}

Eigen::VectorXd initial_pref_distribution(const PrefSpace& space, const UserParams& params) {
  return wrapped_gaussian_bins(space, params.init_pref_mean_deg, params.init_pref_std_deg);
}

UserState sample_initial_state(const PrefSpace& space, const UserParams& params, Rng& rng) {
  UserState s;
  s.pref = rng.categorical(initial_pref_distribution(space, params));
  s.slate_belief = uniform_slate(space);
  return s;
}

}  // namespace prefshift
