#include "prefshift/rollout.hpp"

#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "support/test_util.hpp"

using namespace prefshift;
using namespace prefshift::testing;

TEST_SUITE("rollout") {

TEST_CASE("dataset generation") {
  PrefSpace space(36);
  UserParams params = default_user_params(space);
  Rng rng(1);
  const auto data = generate_dataset(space, params, 400, 10, rng);
  REQUIRE(static_cast<int>(data.size()) == 400);

  SUBCASE("horizon and ids are exact") {
    int slate_set = 0, near_random = 0;
    for (const auto& t : data) {
      CHECK(t.length() == 10);
      REQUIRE(t.gt_prefs.has_value());
      CHECK(static_cast<int>(t.gt_prefs->size()) == 10);
      t.validate(space);
      if (t.policy_id == "slate-set") ++slate_set;
      if (t.policy_id == "near-random") ++near_random;
    }
    CHECK(slate_set == 200);
    CHECK(near_random == 200);
  }

  SUBCASE("near-random half serves the uniform slate about 80% of the time") {
    const Slate uniform = uniform_slate(space);
    int uniform_count = 0, total = 0;
    for (const auto& t : data) {
      if (t.policy_id != "near-random") continue;
      for (const auto& s : t.slates) {
        uniform_count += (s.probs == uniform.probs) ? 1 : 0;
        ++total;
      }
    }
    const double freq = static_cast<double>(uniform_count) / total;
    const double se = std::sqrt(0.8 * 0.2 / total);
    CHECK(std::abs(freq - 0.8) <= 3.0 * se);
  }

  SUBCASE("deterministic under a fixed seed") {
    Rng rng2(1);
    const auto again = generate_dataset(space, params, 400, 10, rng2);
    for (int i = 0; i < 400; ++i) {
      CHECK(again[i].choices == data[i].choices);
      CHECK(*again[i].gt_prefs == *data[i].gt_prefs);
    }
  }

  SUBCASE("jsonl round trip is bit exact") {
    const std::string path = "/tmp/prefshift_test_dataset.jsonl";
    std::vector<Trajectory> small(data.begin(), data.begin() + 25);
    write_trajectories_jsonl(path, small);
    const auto back = read_trajectories_jsonl(path);
    REQUIRE(back.size() == small.size());
    for (std::size_t i = 0; i < small.size(); ++i) {
      CHECK(back[i].user_id == small[i].user_id);
      CHECK(back[i].policy_id == small[i].policy_id);
      CHECK(back[i].choices == small[i].choices);
      CHECK(*back[i].gt_prefs == *small[i].gt_prefs);
      for (int t = 0; t < small[i].length(); ++t)
        CHECK(back[i].slates[t].probs == small[i].slates[t].probs);  // exact doubles
    }
    std::remove(path.c_str());
  }
}

TEST_CASE("simulate_future with the oracle in the loop") {
  PrefSpace space(4);
  Rng setup(9);
  UserParams params = random_user_params(space, setup);
  NhmmEngine engine(space, params);
  ChoiceModel cm(space, params);
  std::vector<Slate> slates{random_slate(space, setup), random_slate(space, setup)};
  std::vector<int> choices{1, 3};

  SUBCASE("single sample at the next step is exactly the filter output") {
    OraclePredictor proto(engine);
    Rng rng(2);
    RandomSlatePolicy policy(space);
    const RolloutReport report = simulate_future(proto, cm, slates, choices, policy, 2, 1, rng);
    REQUIRE(report.pref_beliefs.size() == 1);
    CHECK(report.first_t == 2);
    CHECK(total_variation(report.pref_beliefs[0], engine.filter_sequence(slates, choices)) <
          1e-12);
  }

  SUBCASE("monte-carlo futures converge to exact inference") {
    std::vector<Slate> actions{random_slate(space, setup), random_slate(space, setup)};
    Eigen::VectorXd w(2);
    w << 0.5, 0.5;
    MixtureSlatePolicy policy(actions, w, "mix");
    OraclePredictor proto(engine);
    Rng rng(3), rng2(4);
    const RolloutReport report =
        simulate_future(proto, cm, slates, choices, policy, 4, 10000, rng);
    const auto exact = engine.predict_future(slates, choices, policy, 4, 1, rng2);
    REQUIRE(report.pref_beliefs.size() == exact.size());
    for (std::size_t k = 0; k < exact.size(); ++k)
      CHECK(total_variation(report.pref_beliefs[k], exact[k]) < 0.02);
  }

  SUBCASE("empty history bootstraps from the prior") {
    OraclePredictor proto(engine);
    Rng rng(5);
    RandomSlatePolicy policy(space);
    const RolloutReport report = simulate_future(proto, cm, {}, {}, policy, 3, 200, rng);
    CHECK(report.first_t == 0);
    REQUIRE(report.pref_beliefs.size() == 4);
    CHECK(total_variation(report.pref_beliefs[0], engine.prior()) < 1e-12);
    for (const auto& b : report.pref_beliefs) CHECK(is_simplex(b));
    for (const auto& c : report.choice_beliefs) CHECK(is_simplex(c));
  }

  SUBCASE("horizon inside the history is rejected") {
    OraclePredictor proto(engine);
    Rng rng(6);
    RandomSlatePolicy policy(space);
    CHECK_THROWS_AS(simulate_future(proto, cm, slates, choices, policy, 1, 10, rng),
                    std::invalid_argument);
  }
}

TEST_CASE("oracle counterfactual simulation matches exact inference") {
  PrefSpace space(4);
  Rng setup(21);
  UserParams params = random_user_params(space, setup);
  NhmmEngine engine(space, params);
  ChoiceModel cm(space, params);
  Trajectory traj;
  for (int t = 0; t < 3; ++t) {
    traj.slates.push_back(random_slate(space, setup));
    traj.choices.push_back(static_cast<int>(setup.uniform01() * 4));
  }
  RandomSlatePolicy policy(space);

  Rng rng(1);
  const RolloutReport report =
      simulate_counterfactual_oracle(traj, policy, engine, cm, 3, 5000, rng);
  REQUIRE(report.pref_beliefs.size() == 4);
  CHECK(total_variation(report.pref_beliefs[0], engine.smooth_initial(traj.slates, traj.choices)) <
        1e-12);
  Rng rng2(2);
  for (int t = 1; t <= 3; ++t) {
    const BeliefVec exact =
        engine.counterfactual(traj.slates, traj.choices, policy, t, 1, rng2);
    CHECK(total_variation(report.pref_beliefs[t], exact) < 0.02);
  }
}

TEST_CASE("roll_trajectory") {
  PrefSpace space(36);
  UserParams params = default_user_params(space);
  NhmmEngine engine(space, params);
  ChoiceModel cm(space, params);
  GroundTruthUserSim user(space, params);
  OracleEstimators est(engine);
  RandomSlatePolicy policy(space);

  SUBCASE("unpenalized rewards are the engagement term only") {
    Rng rng(3);
    const RolloutTrace trace =
        roll_trajectory(policy, user, est, cm, 5, false, 1.0, 1.0, rng);
    for (const auto& s : trace.steps) CHECK(s.reward == doctest::Approx(s.eng));
  }

  SUBCASE("penalized rewards add the weighted safe terms") {
    Rng rng(4);
    const RolloutTrace trace = roll_trajectory(policy, user, est, cm, 5, true, 0.5, 2.0, rng);
    for (const auto& s : trace.steps)
      CHECK(s.reward == doctest::Approx(s.eng + 0.5 * s.u0 + 2.0 * s.nps));
  }

  SUBCASE("bit-identical under a fixed seed") {
    Rng a(7), b(7);
    const RolloutTrace ta = roll_trajectory(policy, user, est, cm, 8, true, 1, 1, a);
    const RolloutTrace tb = roll_trajectory(policy, user, est, cm, 8, true, 1, 1, b);
    CHECK(ta.traj.choices == tb.traj.choices);
    for (int t = 0; t < 8; ++t) {
      CHECK(ta.steps[t].reward == tb.steps[t].reward);
      CHECK(*ta.steps[t].true_pref == *tb.steps[t].true_pref);
    }
  }

  SUBCASE("random policy penalty vs its own NPS baseline is small") {
    // D = eng - eng_nps when the evaluated policy is the safe policy itself:
    // zero up to the belief-coupling term of the open-loop counterfactual.
    const int n_traj = 1000;
    std::vector<double> d(n_traj);
    Rng rng(11);
    for (int i = 0; i < n_traj; ++i) {
      Rng traj_rng = rng.split(i);
      auto u = user.clone();
      auto e = est.clone();
      auto p = policy.clone();
      const RolloutTrace trace = roll_trajectory(*p, *u, *e, cm, 10, false, 1, 1, traj_rng);
      double di = 0;
      for (const auto& s : trace.steps) di += s.eng - s.nps;
      d[i] = di;
    }
    double mean = 0;
    for (double v : d) mean += v;
    mean /= n_traj;
    CHECK(std::abs(mean) < 1.0);
  }
}

TEST_CASE("cohort heatmap columns are simplices") {
  PrefSpace space(36);
  UserParams params = default_user_params(space);
  NhmmEngine engine(space, params);
  ChoiceModel cm(space, params);
  RandomSlatePolicy policy(space);
  Rng rng(13);
  const Eigen::MatrixXd hm = cohort_heatmap(policy, space, params, engine, cm, 200, 10, rng);
  CHECK(hm.rows() == 36);
  CHECK(hm.cols() == 11);
  for (int t = 0; t <= 10; ++t) {
    CHECK(std::abs(hm.col(t).sum() - 1.0) < 1e-9);
    CHECK(hm.col(t).minCoeff() >= 0.0);
  }
}

}  // TEST_SUITE
