#include "prefshift/env.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace prefshift {

PrefSpace::PrefSpace(int n_bins) : n_(n_bins) {
  if (n_bins < 2) throw std::invalid_argument("PrefSpace: need at least 2 bins");
  cos_table_.resize(n_);
  for (int k = 0; k < n_; ++k) cos_table_[k] = std::cos(2.0 * M_PI * k / n_);
  cos_matrix_.resize(n_, n_);
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b) cos_matrix_(a, b) = cos_between(a, b);
}

int PrefSpace::bin_of_deg(double deg) const {
  // Bin i covers [center_i, center_i + 360/n); an angle equal to a bin
  // center maps to that bin.
  double d = std::fmod(deg, 360.0);
  if (d < 0) d += 360.0;
  const int bin = static_cast<int>(std::floor(d * n_ / 360.0));
  return bin % n_;
}

void PrefSpace::check_bin(int b) const {
  if (b < 0 || b >= n_)
    throw std::out_of_range("bin index " + std::to_string(b) + " out of range [0, " +
                            std::to_string(n_) + ")");
}

bool is_simplex(const Eigen::VectorXd& v, double tol) {
  if (v.size() == 0) return false;
  if (v.minCoeff() < 0.0) return false;
  return std::abs(v.sum() - 1.0) <= tol;
}

void check_simplex(const Eigen::VectorXd& v, const char* what) {
  if (!is_simplex(v))
    throw std::invalid_argument(std::string(what) + ": not a probability simplex");
}

double engagement(const PrefSpace& space, int pref_bin, int item_bin) {
  space.check_bin(pref_bin);
  space.check_bin(item_bin);
  return space.cos_between(pref_bin, item_bin);
}

Eigen::VectorXd wrapped_gaussian_bins(const PrefSpace& space, double mean_deg, double std_deg) {
  if (std_deg <= 0.0) throw std::invalid_argument("wrapped_gaussian_bins: std must be positive");
  const int n = space.n();
  Eigen::VectorXd p(n);
  const double inv2var = 1.0 / (2.0 * std_deg * std_deg);
  for (int i = 0; i < n; ++i) {
    const double d = space.bin_center_deg(i) - mean_deg;
    double acc = 0.0;
    for (int wrap = -1; wrap <= 1; ++wrap) {
      const double dd = d + 360.0 * wrap;
      acc += std::exp(-dd * dd * inv2var);
    }
    p[i] = acc;
  }
  p /= p.sum();
  return p;
}

Slate make_wrapped_gaussian_slate(const PrefSpace& space, double mean_deg, double std_deg) {
  return Slate{wrapped_gaussian_bins(space, mean_deg, std_deg)};
}

Slate uniform_slate(const PrefSpace& space) {
  return Slate{Eigen::VectorXd::Constant(space.n(), 1.0 / space.n())};
}

}  // namespace prefshift
