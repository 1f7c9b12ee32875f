#pragma once

#include <Eigen/Core>

namespace prefshift {

/// Discretized circular content/preference space: n evenly spaced bins on
/// [0°, 360°), bin i centered at i * 360 / n. All downstream state (user
/// preferences, item features) lives on these bins; continuous angles appear
/// only when constructing distributions.
class PrefSpace {
 public:
  explicit PrefSpace(int n_bins = 36);

  int n() const { return n_; }
  double bin_center_deg(int i) const { return i * 360.0 / n_; }

  /// Bin whose center is closest to the given angle (wrapping).
  int bin_of_deg(double deg) const;

  /// cos of the angle between bin centers a and b (table lookup).
  double cos_between(int a, int b) const { return cos_table_[wrap(a - b)]; }

  /// cos_table()[k] = cos(2*pi*k / n).
  const Eigen::VectorXd& cos_table() const { return cos_table_; }

  /// CosM(a, b) = cos of the angle between bins a and b.
  const Eigen::MatrixXd& cos_matrix() const { return cos_matrix_; }

  void check_bin(int b) const;

 private:
  int wrap(int k) const {
    k %= n_;
    return k < 0 ? k + n_ : k;
  }
  int n_;
  Eigen::VectorXd cos_table_;
  Eigen::MatrixXd cos_matrix_;
};

/// A slate: the recommender's per-step action, modeled as a categorical
/// distribution over the n feature bins; also the object of the user's
/// slate belief.
struct Slate {
  Eigen::VectorXd probs;
};

constexpr double kSimplexTol = 1e-9;

bool is_simplex(const Eigen::VectorXd& v, double tol = kSimplexTol);
void check_simplex(const Eigen::VectorXd& v, const char* what);

/// Engagement reward: cos of the angular difference between the preference
/// bin and the chosen item's bin (unit-vector dot product in d=2).
double engagement(const PrefSpace& space, int pref_bin, int item_bin);

/// Probabilities of a wrapped normal (Gaussian summed over +-1 period)
/// evaluated at the bin centers and normalized. Shared by slate construction
/// and the initial-preference prior.
Eigen::VectorXd wrapped_gaussian_bins(const PrefSpace& space, double mean_deg, double std_deg);

Slate make_wrapped_gaussian_slate(const PrefSpace& space, double mean_deg, double std_deg);
Slate uniform_slate(const PrefSpace& space);

}  // namespace prefshift
