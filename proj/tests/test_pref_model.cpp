#include "prefshift/pref_model.hpp"

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "support/test_util.hpp"

using namespace prefshift;
using namespace prefshift::testing;

namespace {

// Frozen-preference toy world: each user keeps one preference bin forever and
// chooses items with a sharp temperature, so a few observations identify the
// preference. The learned models only ever see slates and choices.
struct ToyWorld {
  PrefSpace space{8};
  UserParams params;
  std::vector<Slate> slate_set;
  std::vector<Trajectory> train, val;
};

ToyWorld make_frozen_world(int n_train, int n_val, int len, std::uint64_t seed) {
  ToyWorld w;
  w.params.beta_c_field = Eigen::VectorXd::Constant(8, 12.0);
  for (int m = 0; m < 8; ++m)
    w.slate_set.push_back(make_wrapped_gaussian_slate(w.space, m * 45.0, 50.0));
  w.slate_set.push_back(uniform_slate(w.space));
  Rng rng(seed);
  auto gen = [&](int count, std::int64_t base) {
    std::vector<Trajectory> out;
    for (int i = 0; i < count; ++i) {
      Rng traj_rng = rng.split(base + i);
      Trajectory traj;
      traj.user_id = base + i;
      traj.policy_id = "toy";
      traj.gt_prefs.emplace();
      const int u = static_cast<int>(traj_rng.uniform01() * 8);
      for (int t = 0; t < len; ++t) {
        const Slate& s =
            w.slate_set[static_cast<int>(traj_rng.uniform01() * w.slate_set.size())];
        const Eigen::VectorXd cd = choice_distribution(w.space, u, s, 12.0);
        traj.slates.push_back(s);
        traj.choices.push_back(traj_rng.categorical(cd));
        traj.gt_prefs->push_back(u);
      }
      out.push_back(std::move(traj));
    }
    return out;
  };
  w.train = gen(n_train, 0);
  w.val = gen(n_val, 100000);
  return w;
}

TrainConfig toy_config() {
  TrainConfig cfg;
  cfg.learning_rate = 4e-3;
  cfg.batch_size = 100;
  cfg.epochs = 150;
  cfg.mixture_components = 2;
  cfg.hidden = 32;
  return cfg;
}

double late_mass_on_true_bin(const SequenceModel& model, const ToyWorld& w,
                             bool condition_on_true_init = false) {
  double mass = 0.0;
  int count = 0;
  for (const auto& traj : w.val) {
    std::optional<BeliefVec> cond;
    if (condition_on_true_init) {
      cond = BeliefVec::Zero(8);
      (*cond)[(*traj.gt_prefs)[0]] = 1.0;
    }
    LearnedPredictor pred(model, w.space, cond);
    for (int t = 0; t < traj.length(); ++t) {
      if (t >= traj.length() - 2) {
        mass += pred.belief()[(*traj.gt_prefs)[t]];
        ++count;
      }
      pred.observe(traj.slates[t], traj.choices[t]);
    }
  }
  return mass / count;
}

}  // namespace

TEST_SUITE("pref_model") {

TEST_CASE("training on the frozen-preference world recovers preferences") {
  ToyWorld w = make_frozen_world(800, 120, 6, 42);
  Rng rng(7);
  std::ostringstream log;
  const SequenceModel pf = train_sequence_model(ModelTask::kFuture, w.train, w.val, w.space,
                                                w.params, toy_config(), rng, nullptr, &log);
  CHECK(late_mass_on_true_bin(pf, w) > 0.9);

  // Deterministic inference: identical inputs give identical outputs.
  LearnedPredictor a(pf, w.space), b(pf, w.space);
  a.observe(w.val[0].slates[0], w.val[0].choices[0]);
  b.observe(w.val[0].slates[0], w.val[0].choices[0]);
  CHECK(total_variation(a.belief(), b.belief()) == 0.0);

  // Empty-history prediction is well defined and a simplex.
  LearnedPredictor fresh(pf, w.space);
  CHECK(is_simplex(fresh.belief()));

  // Checkpoint round trip preserves behavior exactly.
  const SequenceModel loaded = SequenceModel::from_json_string(pf.to_json_string());
  LearnedPredictor p1(pf, w.space), p2(loaded, w.space);
  for (int t = 0; t < w.val[0].length(); ++t) {
    CHECK(total_variation(p1.belief(), p2.belief()) == 0.0);
    p1.observe(w.val[0].slates[t], w.val[0].choices[t]);
    p2.observe(w.val[0].slates[t], w.val[0].choices[t]);
  }

  // Initial model: recover u_0 from later context, with Bayes correction.
  Rng rng_i(8);
  const SequenceModel pi = train_sequence_model(ModelTask::kInitial, w.train, w.val, w.space,
                                                w.params, toy_config(), rng_i, nullptr, nullptr);
  ChoiceModel cm(w.space, w.params);
  double mass0 = 0.0;
  for (const auto& traj : w.val)
    mass0 += corrected_initial_belief(pi, w.space, cm, traj.slates, traj.choices,
                                      traj.length())[(*traj.gt_prefs)[0]];
  mass0 /= w.val.size();
  CHECK(mass0 > 0.9);

  // Counterfactual model conditioned on the recovered initial belief.
  Rng rng_c(9);
  const SequenceModel pc =
      train_sequence_model(ModelTask::kCounterfactual, w.train, w.val, w.space, w.params,
                           toy_config(), rng_c, &pi, nullptr);
  CHECK(late_mass_on_true_bin(pc, w, true) > 0.9);

  // Consistency probe: conditioned on the population prior with no context,
  // the counterfactual model should roughly match the future model's prior.
  LearnedPredictor pc_prior(pc, w.space, BeliefVec::Constant(8, 0.125));
  LearnedPredictor pf_prior(pf, w.space);
  CHECK(total_variation(pc_prior.belief(), pf_prior.belief()) < 0.1);
}

TEST_CASE("two-trajectory sanity descent") {
  ToyWorld w = make_frozen_world(2, 1, 4, 5);
  TrainConfig cfg = toy_config();
  cfg.epochs = 25;
  cfg.batch_size = 2;
  Rng rng(3);
  std::ostringstream log;
  train_sequence_model(ModelTask::kFuture, w.train, {}, w.space, w.params, cfg, rng, nullptr,
                       &log);
  // Parse first and last epoch train losses from the log.
  std::istringstream in(log.str());
  std::string word;
  std::vector<double> losses;
  while (in >> word) {
    if (word == "train_loss") {
      double v;
      in >> v;
      losses.push_back(v);
    }
  }
  REQUIRE(losses.size() >= 2);
  CHECK(losses.back() < losses.front());
}

TEST_CASE("training rejects bad inputs") {
  ToyWorld w = make_frozen_world(2, 0, 3, 6);
  Rng rng(1);
  CHECK_THROWS_AS(train_sequence_model(ModelTask::kFuture, {}, {}, w.space, w.params,
                                       toy_config(), rng, nullptr, nullptr),
                  std::invalid_argument);
  CHECK_THROWS_AS(train_sequence_model(ModelTask::kCounterfactual, w.train, {}, w.space,
                                       w.params, toy_config(), rng, nullptr, nullptr),
                  std::invalid_argument);
}

TEST_CASE("uniform predictor sits at chance level") {
  ToyWorld w = make_frozen_world(2, 60, 5, 12);
  ChoiceModel cm(w.space, w.params);
  const PredictionMetrics m = evaluate_future_predictions(
      [&](const Trajectory&) { return std::make_unique<UniformPredictor>(8); }, w.val, cm);
  CHECK(m.pref_acc == doctest::Approx(1.0 / 8).epsilon(0.5));
  CHECK(m.pref_nll == doctest::Approx(std::log(8.0)).epsilon(0.01));
}

TEST_CASE("mixture belief output obeys its invariants") {
  Rng rng(10);
  SequenceModel m = SequenceModel::create(ModelTask::kFuture, 12, 5, 8, 4, rng);
  const Eigen::VectorXd h = Eigen::VectorXd::Random(8);
  const MixtureBelief belief = m.mixture_at(h);
  belief.validate();
  CHECK(static_cast<int>(belief.components.size()) == 4);
  for (const auto& c : belief.components) {
    CHECK(c.concentration >= 1e-9);
    CHECK(c.concentration <= 1e3 + 1e-9);
  }
}

}  // TEST_SUITE
