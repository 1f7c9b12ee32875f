#pragma once

// Exhaustive-enumeration reference for the NHMM inference engine. Everything
// here works directly from the ground-truth user primitives (choice
// distributions and preference transitions), never from the engine under
// test, and scales as n^(T+2) -- fine for the n <= 6, T <= 4 instances the
// oracle tests use.

#include <functional>
#include <vector>

#include "prefshift/nhmm.hpp"
#include "prefshift/user.hpp"

namespace prefshift::testing {

struct BruteForceModel {
  PrefSpace space;
  UserParams params;
  Eigen::VectorXd prior;

  BruteForceModel(const PrefSpace& s, const UserParams& p)
      : space(s), params(p), prior(initial_pref_distribution(s, p)) {}

  Eigen::VectorXd likelihood(const Slate& slate, int choice) const {
    Eigen::VectorXd lik(space.n());
    for (int u = 0; u < space.n(); ++u)
      lik[u] = choice_distribution(space, u, slate, params.beta_c_field[u])[choice];
    return lik;
  }

  Eigen::MatrixXd transition(const Slate& slate) const {
    return preference_transition_matrix(space, params, update_slate_belief(slate));
  }

  // Joint weights over preference paths u_{0:T+1} given the observed
  // trajectory, reduced to a marginal at `at` (0 for smoothing, T+1 for the
  // one-step-ahead filter).
  Eigen::VectorXd path_marginal(const std::vector<Slate>& slates, const std::vector<int>& choices,
                                int at) const {
    const int n = space.n();
    const int T1 = static_cast<int>(slates.size());
    std::vector<Eigen::VectorXd> liks;
    std::vector<Eigen::MatrixXd> trans;
    for (int t = 0; t < T1; ++t) {
      liks.push_back(likelihood(slates[t], choices[t]));
      trans.push_back(transition(slates[t]));
    }
    Eigen::VectorXd marginal = Eigen::VectorXd::Zero(n);
    std::vector<int> path(T1 + 1);
    std::function<void(int, double)> recurse = [&](int depth, double weight) {
      if (depth == T1 + 1) {
        marginal[path[at]] += weight;
        return;
      }
      for (int u = 0; u < n; ++u) {
        path[depth] = u;
        double w = weight;
        if (depth == 0)
          w *= prior[u];
        else
          w *= trans[depth - 1](path[depth - 1], u);
        if (depth < T1) w *= liks[depth][u];
        if (w > 0.0) recurse(depth + 1, w);
      }
    };
    recurse(0, 1.0);
    return marginal / marginal.sum();
  }

  // Open-loop propagation of a belief through k steps of a fixed slate
  // distribution (future choices integrate out exactly).
  Eigen::VectorXd propagate(const Eigen::VectorXd& start,
                            const std::vector<std::pair<double, Slate>>& dist, int k) const {
    Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(space.n(), space.n());
    for (const auto& [p, s] : dist) avg += p * transition(s);
    Eigen::VectorXd b = start;
    for (int i = 0; i < k; ++i) b = avg.transpose() * b;
    return b;
  }

  // Marginal over the preference after `depth` steps under a policy whose
  // slate is a deterministic function of the simulated choice history;
  // enumerates every choice sequence.
  Eigen::VectorXd rollout_marginal_choice_tree(
      const Eigen::VectorXd& start,
      const std::function<Slate(const std::vector<int>&)>& slate_for_history, int depth) const {
    const int n = space.n();
    Eigen::VectorXd marginal = Eigen::VectorXd::Zero(n);
    std::vector<int> history;
    std::function<void(const Eigen::VectorXd&, int)> recurse = [&](const Eigen::VectorXd& w,
                                                                   int d) {
      if (d == depth) {
        marginal += w;
        return;
      }
      const Slate s = slate_for_history(history);
      const Eigen::MatrixXd tr = transition(s);
      for (int x = 0; x < n; ++x) {
        const Eigen::VectorXd lik = likelihood(s, x);
        const Eigen::VectorXd w2 = tr.transpose() * w.cwiseProduct(lik).eval();
        if (w2.sum() <= 0.0) continue;
        history.push_back(x);
        recurse(w2, d + 1);
        history.pop_back();
      }
    };
    recurse(start, 0);
    return marginal / marginal.sum();
  }
};

}  // namespace prefshift::testing
