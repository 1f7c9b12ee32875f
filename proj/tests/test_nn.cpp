#include "prefshift/nn.hpp"

#include <cmath>
#include <functional>

#include "doctest.h"
#include "prefshift/pref_model.hpp"
#include "prefshift/policy_opt.hpp"
#include "support/test_util.hpp"

using namespace prefshift;
using namespace prefshift::testing;
using nn::Mat;

namespace {

// Central finite differences of a scalar function of a ParamSet entry.
double numeric_grad(const std::function<double()>& f, double& param, double h = 1e-6) {
  const double saved = param;
  param = saved + h;
  const double fp = f();
  param = saved - h;
  const double fm = f();
  param = saved;
  return (fp - fm) / (2 * h);
}

double rel_err(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / denom;
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("tape ops against finite differences") {
  Rng rng(4);
  Mat a(2, 3), b(2, 3), w(3, 4), bias(1, 4), col(2, 1);
  auto fill = [&](Mat& m, double lo, double hi) {
    for (long i = 0; i < m.size(); ++i) m.data()[i] = lo + (hi - lo) * rng.uniform01();
  };
  fill(a, 0.2, 1.5);
  fill(b, -1.0, 1.0);
  fill(w, -0.8, 0.8);
  fill(bias, -0.3, 0.3);
  fill(col, 0.4, 1.4);

  // Composite graph exercising every differentiable op.
  std::vector<Mat*> leaves{&a, &b, &w, &bias, &col};
  auto build = [&](nn::Tape& tape, std::vector<int>* out_ids) {
    const int ia = tape.leaf(a), ib = tape.leaf(b), iw = tape.leaf(w), ibias = tape.leaf(bias),
              icol = tape.leaf(col);
    if (out_ids) *out_ids = {ia, ib, iw, ibias, icol};
    const int m1 = tape.add(tape.matmul(tape.mul(ia, tape.sigmoid(ib)), iw), ibias);
    const int m2 = tape.softmax_rows(m1);
    const int m3 = tape.log_(tape.add_scalar(m2, 0.1));
    const int m4 = tape.mul_colbcast(m3, icol);
    const int m5 = tape.div_colbcast(m4, tape.sqrt_(tape.add_scalar(tape.square(icol), 0.5)));
    const int m6 = tape.tanh_(tape.concat_cols({m5, tape.exp_(tape.scale(m2, 0.3))}));
    const int m7 = tape.slice_cols(m6, 1, 5);
    const int m8 = tape.min_(m7, tape.one_minus(tape.clamp_(m7, -0.4, 0.6)));
    const int m9 = tape.sub(m8, tape.mul(m8, m8));
    return tape.mean_all(tape.square(tape.add(m9, tape.mul_colbcast(m9, tape.sum_rows(m9)))));
  };
  auto loss_value = [&]() {
    nn::Tape t;
    return t.value(build(t, nullptr))(0, 0);
  };

  nn::Tape tape;
  std::vector<int> ids;
  const int loss = build(tape, &ids);
  tape.backward(loss);
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    Mat& leaf = *leaves[li];
    const Mat& g = tape.grad(ids[li]);
    for (long i = 0; i < leaf.size(); ++i) {
      const double num = numeric_grad(loss_value, leaf.data()[i]);
      CHECK(rel_err(num, g.data()[i]) < 1e-5);
    }
  }
}

TEST_CASE("sequence-model training loss gradient matches finite differences") {
  // Minimal probe configuration.
  PrefSpace space(3);
  Rng rng(7);
  SequenceModel model = SequenceModel::create(ModelTask::kFuture, 3, 3, 2, 1, rng);
  UserParams params;
  params.beta_c_field = Eigen::VectorXd::Constant(3, 1.2);
  ChoiceModel cm(space, params);
  Trajectory traj;
  for (int t = 0; t < 3; ++t) {
    traj.slates.push_back(random_slate(space, rng));
    traj.choices.push_back(static_cast<int>(rng.uniform01() * 3));
  }
  const SeqExample ex = make_example(model, cm, traj, false, nullptr);
  const std::vector<const SeqExample*> batch{&ex};

  auto loss_value = [&]() {
    nn::Tape tape;
    return tape.value(model_tape_forward(tape, model, batch).loss_node)(0, 0);
  };

  nn::Tape tape;
  const ModelTapeForward fwd = model_tape_forward(tape, model, batch);
  tape.backward(fwd.loss_node);
  int checked = 0;
  for (std::size_t pi = 0; pi < model.params().values.size(); ++pi) {
    Mat& m = model.params().values[pi];
    const Mat& g = tape.grad(fwd.param_nodes[pi]);
    for (long i = 0; i < m.size(); ++i) {
      const double num = numeric_grad(loss_value, m.data()[i], 1e-5);
      CHECK_MESSAGE(rel_err(num, g.data()[i]) < 1e-4,
                    "param " << model.params().names[pi] << " entry " << i);
      ++checked;
    }
  }
  CHECK(checked > 10);
}

TEST_CASE("tape forward agrees with the plain inference path") {
  PrefSpace space(5);
  Rng rng(11);
  SequenceModel model = SequenceModel::create(ModelTask::kFuture, 5, 4, 6, 3, rng);
  UserParams params;
  params.beta_c_field = Eigen::VectorXd::Constant(5, 0.8);
  ChoiceModel cm(space, params);
  Trajectory traj;
  for (int t = 0; t < 4; ++t) {
    traj.slates.push_back(random_slate(space, rng));
    traj.choices.push_back(static_cast<int>(rng.uniform01() * 5));
  }
  const SeqExample ex = make_example(model, cm, traj, false, nullptr);
  const std::vector<const SeqExample*> batch{&ex};
  nn::Tape tape;
  const ModelTapeForward fwd = model_tape_forward(tape, model, batch);

  LearnedPredictor pred(model, space);
  for (int t = 0; t < 4; ++t) {
    const BeliefVec plain = pred.belief();
    const Eigen::VectorXd taped = tape.value(fwd.belief_nodes[t]).row(0).transpose();
    CHECK(total_variation(plain, taped) < 1e-9);
    pred.observe(traj.slates[t], traj.choices[t]);
  }
}

TEST_CASE("policy log-prob gradient matches finite differences") {
  Rng rng(3);
  RecurrentPolicyNet net = RecurrentPolicyNet::create(7, 3, 4, rng);
  std::vector<Mat> obs(2, Mat::Zero(2, 7));
  for (auto& o : obs)
    for (long i = 0; i < o.size(); ++i) o.data()[i] = rng.uniform01();
  std::vector<Eigen::VectorXi> acts(2, Eigen::VectorXi::Zero(2));
  acts[0] << 1, 3;
  acts[1] << 0, 2;

  // Loss touching both heads so every parameter carries a gradient.
  auto build_loss = [&](nn::Tape& tape, const PolicyTapeForward& fwd) {
    const int logp = tape.add(fwd.logp_nodes[0], fwd.logp_nodes[1]);
    const int value = tape.add(fwd.value_nodes[0], fwd.value_nodes[1]);
    return tape.mean_all(tape.add(logp, tape.scale(value, 0.25)));
  };
  auto loss_value = [&]() {
    nn::Tape tape;
    const PolicyTapeForward fwd = policy_tape_forward(tape, net, obs, acts);
    return tape.value(build_loss(tape, fwd))(0, 0);
  };

  nn::Tape tape;
  const PolicyTapeForward fwd = policy_tape_forward(tape, net, obs, acts);
  const int loss = build_loss(tape, fwd);
  tape.backward(loss);
  for (std::size_t pi = 0; pi < net.params().values.size(); ++pi) {
    Mat& m = net.params().values[pi];
    const Mat& g = tape.grad(fwd.param_nodes[pi]);
    for (long i = 0; i < m.size(); ++i) {
      const double num = numeric_grad(loss_value, m.data()[i], 1e-5);
      CHECK_MESSAGE(rel_err(num, g.data()[i]) < 1e-4,
                    "param " << net.params().names[pi] << " entry " << i);
    }
  }
}

TEST_CASE("policy tape forward agrees with the plain acting path") {
  Rng rng(13);
  RecurrentPolicyNet net = RecurrentPolicyNet::create(6, 4, 5, rng);
  std::vector<Mat> obs(3, Mat::Zero(1, 6));
  std::vector<Eigen::VectorXi> acts(3, Eigen::VectorXi::Zero(1));
  for (auto& o : obs)
    for (long i = 0; i < o.size(); ++i) o.data()[i] = 2.0 * rng.uniform01() - 1.0;

  nn::Tape tape;
  const PolicyTapeForward fwd = policy_tape_forward(tape, net, obs, acts);
  RecurrentPolicyNet::State state = net.initial_state();
  for (int t = 0; t < 3; ++t) {
    Eigen::VectorXd logits;
    double value;
    net.step(state, obs[t].row(0).transpose(), logits, value);
    CHECK(std::abs(value - tape.value(fwd.value_nodes[t])(0, 0)) < 1e-9);
    Eigen::VectorXd probs = (logits.array() - logits.maxCoeff()).exp();
    probs /= probs.sum();
    CHECK(std::abs(std::log(probs[0]) - tape.value(fwd.logp_nodes[t])(0, 0)) < 1e-9);
  }
}

TEST_CASE("adam minimizes a quadratic") {
  nn::ParamSet p;
  p.add("x", 2, 2);
  p.values[0] << 3.0, -2.0, 1.5, 0.5;
  nn::AdamOptimizer opt(0.05);
  for (int i = 0; i < 500; ++i) {
    std::vector<Mat> grads{2.0 * p.values[0]};
    opt.step(p, grads);
  }
  CHECK(p.values[0].cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("glorot leaves biases at zero") {
  nn::ParamSet p;
  p.add("W", 4, 4);
  p.add("b", 1, 4);
  Rng rng(2);
  nn::glorot_init(p, rng);
  CHECK(p.values[1].cwiseAbs().maxCoeff() == 0.0);
  CHECK(p.values[0].cwiseAbs().maxCoeff() > 0.0);
}

}  // TEST_SUITE
