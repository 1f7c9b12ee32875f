#include "prefshift/policy_opt.hpp"

#include <cmath>

#include "doctest.h"
#include "support/test_util.hpp"

using namespace prefshift;
using namespace prefshift::testing;

TEST_SUITE("policy_opt") {

TEST_CASE("action space") {
  PrefSpace space(36);
  const auto actions = action_space_slates(space);
  REQUIRE(static_cast<int>(actions.size()) == 6);
  for (int a = 0; a < 6; ++a) {
    CHECK(is_simplex(actions[a].probs));
    int argmax = 0;
    actions[a].probs.maxCoeff(&argmax);
    CHECK(argmax == space.bin_of_deg(a * 60.0));
  }
}

TEST_CASE("acting") {
  PrefSpace space(36);
  Rng rng(5);
  RecurrentPolicyNet net = RecurrentPolicyNet::create(5 * 36, 64, 6, rng);
  StepEstimates est;
  est.filtering = BeliefVec::Constant(36, 1.0 / 36);
  est.smoothing_u0 = est.filtering;
  est.nps = est.filtering;
  const Eigen::VectorXd obs = encode_policy_obs(space, nullptr, -1, est);

  SUBCASE("fresh policies are near-uniform over actions") {
    RecurrentPolicyNet::State s = net.initial_state();
    Eigen::VectorXd logits;
    double value;
    net.step(s, obs, logits, value);
    Eigen::VectorXd probs = (logits.array() - logits.maxCoeff()).exp();
    probs /= probs.sum();
    CHECK(probs.maxCoeff() < 0.5);
  }

  SUBCASE("deterministic given seed and inputs") {
    Rng a(3), b(3);
    RecurrentPolicyNet::State sa = net.initial_state(), sb = net.initial_state();
    const ActResult ra = act(net, sa, obs, a);
    const ActResult rb = act(net, sb, obs, b);
    CHECK(ra.action == rb.action);
    CHECK(ra.log_prob == rb.log_prob);
    CHECK(ra.value == rb.value);
  }
}

TEST_CASE("discounted returns") {
  const std::vector<double> rewards{1.0, -2.0, 0.5, 3.0};
  SUBCASE("gamma zero is the identity: returns are the immediate rewards") {
    CHECK(discounted_returns(rewards, 0.0) == rewards);
  }
  SUBCASE("gamma one sums the tail") {
    const auto r = discounted_returns(rewards, 1.0);
    CHECK(r[0] == doctest::Approx(2.5));
    CHECK(r[3] == doctest::Approx(3.0));
  }
  SUBCASE("linear in the rewards") {
    std::vector<double> doubled;
    for (double v : rewards) doubled.push_back(2.0 * v);
    const auto r1 = discounted_returns(rewards, 0.9);
    const auto r2 = discounted_returns(doubled, 0.9);
    for (std::size_t i = 0; i < r1.size(); ++i) CHECK(r2[i] == doctest::Approx(2.0 * r1[i]));
  }
}

TEST_CASE("seeded training is bit-reproducible with one worker") {
  PrefSpace space(36);
  UserParams params = default_user_params(space);
  NhmmEngine engine(space, params);
  auto cm = std::make_shared<ChoiceModel>(space, params);
  GroundTruthUserSim user(space, params);
  OracleEstimators est(engine);

  PGConfig cfg;
  cfg.batch_size = 40;
  cfg.minibatch_size = 20;
  cfg.workers = 1;
  cfg.iterations = 2;
  cfg.updates_per_minibatch = 3;

  Rng a(77), b(77);
  const RecurrentPolicyNet net_a = train_policy(cfg, user, est, *cm, a);
  const RecurrentPolicyNet net_b = train_policy(cfg, user, est, *cm, b);
  const Eigen::VectorXd fa = net_a.params().flatten(), fb = net_b.params().flatten();
  REQUIRE(fa.size() == fb.size());
  CHECK((fa - fb).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("policy checkpoint round trip") {
  Rng rng(9);
  RecurrentPolicyNet net = RecurrentPolicyNet::create(12, 8, 6, rng);
  const RecurrentPolicyNet back = RecurrentPolicyNet::from_json_string(net.to_json_string());
  CHECK((net.params().flatten() - back.params().flatten()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("learned policy requires estimates") {
  PrefSpace space(36);
  Rng rng(2);
  RecurrentPolicyNet net = RecurrentPolicyNet::create(5 * 36, 8, 6, rng);
  LearnedSlatePolicy policy(net, space, "test");
  CHECK(policy.needs_estimates());
  Rng r(1);
  CHECK_THROWS_AS(policy.next_slate({}, {}, nullptr, r), std::invalid_argument);
}

}  // TEST_SUITE
