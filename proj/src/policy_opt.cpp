#include "prefshift/policy_opt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "prefshift/parallel.hpp"

namespace prefshift {

std::vector<Slate> action_space_slates(const PrefSpace& space) {
  std::vector<Slate> actions;
  actions.reserve(6);
  for (int mean = 0; mean < 360; mean += 60)
    actions.push_back(make_wrapped_gaussian_slate(space, mean, 60.0));
  return actions;
}

void PGConfig::validate() const {
  if (batch_size <= 0 || minibatch_size <= 0 || workers <= 0 || iterations <= 0 || horizon <= 0 ||
      hidden <= 0)
    throw std::invalid_argument("PGConfig: sizes must be positive");
  if (learning_rate <= 0 || updates_per_minibatch <= 0)
    throw std::invalid_argument("PGConfig: learning rate/updates must be positive");
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("PGConfig: gamma not in [0,1]");
  if (nu1 < 0 || nu2 < 0) throw std::invalid_argument("PGConfig: penalty weights must be >= 0");
  if (batch_size % horizon != 0 || minibatch_size % horizon != 0)
    throw std::invalid_argument("PGConfig: batch sizes must be multiples of the horizon");
}

RecurrentPolicyNet RecurrentPolicyNet::create(int obs_dim, int hidden, int n_actions, Rng& rng) {
  RecurrentPolicyNet net;
  net.obs_dim_ = obs_dim;
  net.hidden_ = hidden;
  net.n_actions_ = n_actions;
  auto& p = net.params_;
  for (const char* g : {"i", "f", "o", "g"}) {
    p.add(std::string("W") + g, obs_dim, hidden);
    p.add(std::string("U") + g, hidden, hidden);
    p.add(std::string("b") + g, 1, hidden);
  }
  p.add("Wa", hidden, n_actions);
  p.add("ba", 1, n_actions);
  p.add("Wv", hidden, 1);
  p.add("bv", 1, 1);
  glorot_init(p, rng);
  return net;
}

RecurrentPolicyNet::State RecurrentPolicyNet::initial_state() const {
  return State{Eigen::VectorXd::Zero(hidden_), Eigen::VectorXd::Zero(hidden_)};
}

void RecurrentPolicyNet::step(State& state, const Eigen::VectorXd& obs,
                              Eigen::VectorXd& action_logits, double& value) const {
  const auto& p = params_;
  auto gate = [&](const char* w, const char* u, const char* b) {
    return (p[p.index_of(w)].transpose() * obs + p[p.index_of(u)].transpose() * state.h +
            p[p.index_of(b)].row(0).transpose())
        .eval();
  };
  const Eigen::ArrayXd i = 1.0 / (1.0 + (-gate("Wi", "Ui", "bi").array()).exp());
  const Eigen::ArrayXd f = 1.0 / (1.0 + (-gate("Wf", "Uf", "bf").array()).exp());
  const Eigen::ArrayXd o = 1.0 / (1.0 + (-gate("Wo", "Uo", "bo").array()).exp());
  const Eigen::ArrayXd g = gate("Wg", "Ug", "bg").array().tanh();
  state.c = (f * state.c.array() + i * g).matrix();
  state.h = (o * state.c.array().tanh()).matrix();
  action_logits = p[p.index_of("Wa")].transpose() * state.h + p[p.index_of("ba")].row(0).transpose();
  value = (p[p.index_of("Wv")].transpose() * state.h)(0) + p[p.index_of("bv")](0, 0);
}

Eigen::VectorXd encode_policy_obs(const PrefSpace& space, const Slate* prev_slate,
                                  int prev_choice, const StepEstimates& est) {
  const int n = space.n();
  Eigen::VectorXd obs = Eigen::VectorXd::Zero(5 * n);
  if (prev_slate) obs.head(n) = prev_slate->probs;
  if (prev_choice >= 0) obs[n + prev_choice] = 1.0;
  obs.segment(2 * n, n) = est.filtering;
  obs.segment(3 * n, n) = est.smoothing_u0;
  obs.segment(4 * n, n) = est.nps;
  return obs;
}

ActResult act(const RecurrentPolicyNet& net, RecurrentPolicyNet::State& state,
              const Eigen::VectorXd& obs, Rng& rng) {
  Eigen::VectorXd logits;
  ActResult out;
  net.step(state, obs, logits, out.value);
  Eigen::VectorXd probs = (logits.array() - logits.maxCoeff()).exp();
  probs /= probs.sum();
  out.action = rng.categorical(probs);
  out.log_prob = std::log(probs[out.action]);
  return out;
}

LearnedSlatePolicy::LearnedSlatePolicy(const RecurrentPolicyNet& net, const PrefSpace& space,
                                       std::string id)
    : net_(&net),
      space_(space),
      actions_(action_space_slates(space)),
      state_(net.initial_state()),
      id_(std::move(id)) {}

void LearnedSlatePolicy::reset() { state_ = net_->initial_state(); }

Slate LearnedSlatePolicy::next_slate(const std::vector<Slate>& slates,
                                     const std::vector<int>& choices, const StepEstimates* est,
                                     Rng& rng) {
  if (est == nullptr)
    throw std::invalid_argument("LearnedSlatePolicy: belief estimates are required");
  const Slate* prev = slates.empty() ? nullptr : &slates.back();
  const int prev_choice = choices.empty() ? -1 : choices.back();
  const Eigen::VectorXd obs = encode_policy_obs(space_, prev, prev_choice, *est);
  const ActResult res = act(*net_, state_, obs, rng);
  return actions_[res.action];
}

std::unique_ptr<Policy> LearnedSlatePolicy::clone() const {
  return std::make_unique<LearnedSlatePolicy>(*this);
}

PolicyTapeForward policy_tape_forward(nn::Tape& tape, const RecurrentPolicyNet& net,
                                      const std::vector<Eigen::MatrixXd>& obs_per_step,
                                      const std::vector<Eigen::VectorXi>& actions_per_step) {
  if (obs_per_step.empty() || obs_per_step.size() != actions_per_step.size())
    throw std::invalid_argument("policy_tape_forward: bad inputs");
  const int B = static_cast<int>(obs_per_step[0].rows());
  const int A = net.n_actions();
  PolicyTapeForward fwd;
  const auto& ps = net.params();
  for (const auto& v : ps.values) fwd.param_nodes.push_back(tape.leaf(v));
  auto pid = [&](const char* name) { return fwd.param_nodes[ps.index_of(name)]; };

  int h = tape.constant(nn::Mat::Zero(B, net.hidden()));
  int c = tape.constant(nn::Mat::Zero(B, net.hidden()));
  for (std::size_t t = 0; t < obs_per_step.size(); ++t) {
    const int x = tape.constant(obs_per_step[t]);
    auto gate = [&](const std::string& letter) {
      return tape.add(tape.add(tape.matmul(x, pid(("W" + letter).c_str())),
                               tape.matmul(h, pid(("U" + letter).c_str()))),
                      pid(("b" + letter).c_str()));
    };
    const int ig = tape.sigmoid(gate("i"));
    const int fg = tape.sigmoid(gate("f"));
    const int og = tape.sigmoid(gate("o"));
    const int gg = tape.tanh_(gate("g"));
    c = tape.add(tape.mul(fg, c), tape.mul(ig, gg));
    h = tape.mul(og, tape.tanh_(c));

    const int logits = tape.add(tape.matmul(h, pid("Wa")), pid("ba"));
    const int probs = tape.softmax_rows(logits);
    const int logp_all = tape.log_(probs);
    nn::Mat onehot = nn::Mat::Zero(B, A);
    for (int i = 0; i < B; ++i) onehot(i, actions_per_step[t][i]) = 1.0;
    fwd.logp_nodes.push_back(tape.sum_rows(tape.mul(logp_all, tape.constant(onehot))));
    fwd.value_nodes.push_back(tape.add(tape.matmul(h, pid("Wv")), pid("bv")));
    fwd.entropy_nodes.push_back(
        tape.scale(tape.sum_rows(tape.mul(probs, logp_all)), -1.0));
  }
  return fwd;
}

std::vector<double> discounted_returns(const std::vector<double>& rewards, double gamma) {
  std::vector<double> returns(rewards.size());
  double ret = 0.0;
  for (int t = static_cast<int>(rewards.size()) - 1; t >= 0; --t) {
    ret = rewards[t] + gamma * ret;
    returns[t] = ret;
  }
  return returns;
}

namespace {

struct CollectedBatch {
  std::vector<Eigen::MatrixXd> obs_per_step;     // per step: (n_traj x obs_dim)
  std::vector<Eigen::VectorXi> actions_per_step;  // per step: n_traj
  std::vector<Eigen::VectorXd> logp_per_step;
  std::vector<Eigen::VectorXd> returns_per_step;
  std::vector<Eigen::VectorXd> adv_per_step;
  double mean_return = 0, eng = 0, u0 = 0, nps = 0;
};

CollectedBatch collect_batch(const RecurrentPolicyNet& net, const PGConfig& cfg,
                             UserSim& user_proto, EstimatorStack& est_proto, ChoiceModel& cm,
                             Rng& rng, int iteration) {
  const PrefSpace& space = cm.space();
  const int n_traj = cfg.batch_size / cfg.horizon;
  const int T = cfg.horizon;
  const auto actions = action_space_slates(space);

  struct TrajData {
    std::vector<Eigen::VectorXd> obs;
    std::vector<int> act;
    std::vector<double> logp, value, reward;
    double eng = 0, u0 = 0, nps = 0;
  };
  std::vector<TrajData> data(n_traj);

  parallel_for(
      n_traj,
      [&](int i) {
        Rng traj_rng = rng.split(static_cast<std::uint64_t>(iteration) * 1000003ULL + i);
        auto user = user_proto.clone();
        auto est = est_proto.clone();
        user->reset(traj_rng);
        est->reset();
        RecurrentPolicyNet::State state = net.initial_state();
        TrajData& td = data[i];
        const Slate* prev_slate = nullptr;
        Slate last_slate;
        int prev_choice = -1;
        for (int t = 0; t < T; ++t) {
          const StepEstimates e = est->before_step();
          const Eigen::VectorXd obs = encode_policy_obs(space, prev_slate, prev_choice, e);
          const ActResult res = act(net, state, obs, traj_rng);
          const Slate& slate = actions[res.action];
          const int choice = user->sample_choice(slate, traj_rng);
          const Eigen::VectorXd cd = cm.choice_belief(e.filtering, slate);
          const double eng = cross_engagement(space, cd, e.filtering);
          const double u0 = cross_engagement(space, cd, e.smoothing_u0);
          const double nps = cross_engagement(space, cd, e.nps);
          td.obs.push_back(obs);
          td.act.push_back(res.action);
          td.logp.push_back(res.log_prob);
          td.value.push_back(res.value);
          td.reward.push_back(eng + (cfg.penalized ? cfg.nu1 * u0 + cfg.nu2 * nps : 0.0));
          td.eng += eng;
          td.u0 += u0;
          td.nps += nps;
          est->observe(slate, choice);
          last_slate = slate;
          prev_slate = &last_slate;
          prev_choice = choice;
        }
      },
      cfg.workers);

  CollectedBatch batch;
  const int obs_dim = net.obs_dim();
  batch.obs_per_step.assign(T, Eigen::MatrixXd::Zero(n_traj, obs_dim));
  batch.actions_per_step.assign(T, Eigen::VectorXi::Zero(n_traj));
  batch.logp_per_step.assign(T, Eigen::VectorXd::Zero(n_traj));
  batch.returns_per_step.assign(T, Eigen::VectorXd::Zero(n_traj));
  batch.adv_per_step.assign(T, Eigen::VectorXd::Zero(n_traj));
  for (int i = 0; i < n_traj; ++i) {
    const TrajData& td = data[i];
    const std::vector<double> returns = discounted_returns(td.reward, cfg.gamma);
    for (int t = 0; t < T; ++t) {
      batch.obs_per_step[t].row(i) = td.obs[t].transpose();
      batch.actions_per_step[t][i] = td.act[t];
      batch.logp_per_step[t][i] = td.logp[t];
      batch.returns_per_step[t][i] = returns[t];
      batch.adv_per_step[t][i] = returns[t] - td.value[t];
    }
    batch.mean_return += returns[0];
    batch.eng += td.eng;
    batch.u0 += td.u0;
    batch.nps += td.nps;
  }
  batch.mean_return /= n_traj;
  batch.eng /= n_traj;
  batch.u0 /= n_traj;
  batch.nps /= n_traj;

  if (cfg.standardize_advantages) {
    double mean = 0, count = static_cast<double>(T) * n_traj;
    for (const auto& a : batch.adv_per_step) mean += a.sum();
    mean /= count;
    double var = 0;
    for (const auto& a : batch.adv_per_step) var += (a.array() - mean).square().sum();
    const double std = std::sqrt(var / count) + 1e-8;
    for (auto& a : batch.adv_per_step) a = (a.array() - mean) / std;
  }
  return batch;
}

}  // namespace

RecurrentPolicyNet train_policy(const PGConfig& cfg, UserSim& user_proto,
                                EstimatorStack& est_proto, ChoiceModel& cm, Rng& rng,
                                std::vector<TrainCurvePoint>* curve, std::ostream* log) {
  cfg.validate();
  const PrefSpace& space = cm.space();
  Rng init_rng = rng.split(0x9017);
  RecurrentPolicyNet net = RecurrentPolicyNet::create(5 * space.n(), cfg.hidden, 6, init_rng);
  nn::AdamOptimizer opt(cfg.learning_rate);
  const int n_traj = cfg.batch_size / cfg.horizon;
  const int mb_traj = cfg.minibatch_size / cfg.horizon;

  Rng collect_rng = rng.split(0xC011);
  Rng shuffle_rng = rng.split(0x54FF);

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const CollectedBatch batch =
        collect_batch(net, cfg, user_proto, est_proto, cm, collect_rng, iter);

    std::vector<int> order(n_traj);
    std::iota(order.begin(), order.end(), 0);
    for (int i = n_traj - 1; i > 0; --i) {
      const int j = static_cast<int>(shuffle_rng.uniform01() * (i + 1));
      std::swap(order[i], order[j]);
    }

    for (int mb = 0; mb * mb_traj < n_traj; ++mb) {
      const int lo = mb * mb_traj;
      const int hi = std::min(n_traj, lo + mb_traj);
      const int B = hi - lo;
      std::vector<Eigen::MatrixXd> obs(cfg.horizon, Eigen::MatrixXd::Zero(B, net.obs_dim()));
      std::vector<Eigen::VectorXi> acts(cfg.horizon, Eigen::VectorXi::Zero(B));
      std::vector<Eigen::VectorXd> logp_old(cfg.horizon, Eigen::VectorXd::Zero(B));
      std::vector<Eigen::VectorXd> returns(cfg.horizon, Eigen::VectorXd::Zero(B));
      std::vector<Eigen::VectorXd> adv(cfg.horizon, Eigen::VectorXd::Zero(B));
      for (int b = 0; b < B; ++b) {
        const int src = order[lo + b];
        for (int t = 0; t < cfg.horizon; ++t) {
          obs[t].row(b) = batch.obs_per_step[t].row(src);
          acts[t][b] = batch.actions_per_step[t][src];
          logp_old[t][b] = batch.logp_per_step[t][src];
          returns[t][b] = batch.returns_per_step[t][src];
          adv[t][b] = batch.adv_per_step[t][src];
        }
      }

      for (int update = 0; update < cfg.updates_per_minibatch; ++update) {
        nn::Tape tape;
        const PolicyTapeForward fwd = policy_tape_forward(tape, net, obs, acts);
        int surr_sum = -1, vf_sum = -1, ent_sum = -1;
        for (int t = 0; t < cfg.horizon; ++t) {
          const int ratio =
              tape.exp_(tape.sub(fwd.logp_nodes[t], tape.constant(logp_old[t])));
          const int adv_node = tape.constant(adv[t]);
          const int s1 = tape.mul(ratio, adv_node);
          const int s2 =
              tape.mul(tape.clamp_(ratio, 1.0 - cfg.policy_clip, 1.0 + cfg.policy_clip), adv_node);
          const int surr = tape.min_(s1, s2);
          surr_sum = surr_sum < 0 ? surr : tape.add(surr_sum, surr);
          const int verr = tape.sub(fwd.value_nodes[t], tape.constant(returns[t]));
          const int vf = tape.clamp_(tape.square(verr), 0.0, cfg.value_clip);
          vf_sum = vf_sum < 0 ? vf : tape.add(vf_sum, vf);
          ent_sum = ent_sum < 0 ? fwd.entropy_nodes[t]
                                : tape.add(ent_sum, fwd.entropy_nodes[t]);
        }
        int loss = tape.add(tape.scale(tape.mean_all(surr_sum), -1.0 / cfg.horizon),
                            tape.scale(tape.mean_all(vf_sum), cfg.value_loss_coeff / cfg.horizon));
        if (cfg.entropy_coeff > 0.0)
          loss = tape.add(loss,
                          tape.scale(tape.mean_all(ent_sum), -cfg.entropy_coeff / cfg.horizon));
        const double loss_val = tape.value(loss)(0, 0);
        if (!std::isfinite(loss_val))
          throw std::runtime_error("train_policy: non-finite loss at iteration " +
                                   std::to_string(iter));
        tape.backward(loss);
        std::vector<nn::Mat> grads;
        grads.reserve(fwd.param_nodes.size());
        for (int nid : fwd.param_nodes) grads.push_back(tape.grad(nid));
        opt.step(net.params(), grads);
      }
    }

    if (curve)
      curve->push_back(
          {iter, batch.mean_return, batch.eng, batch.u0, batch.nps});
    if (log)
      (*log) << "iter " << iter << " mean_return " << batch.mean_return << " eng " << batch.eng
             << " eng_u0 " << batch.u0 << " eng_nps " << batch.nps << "\n";
  }
  return net;
}

std::string RecurrentPolicyNet::to_json_string() const {
  nlohmann::json j;
  j["format_version"] = 1;
  j["kind"] = "recurrent_policy";
  j["obs_dim"] = obs_dim_;
  j["hidden"] = hidden_;
  j["n_actions"] = n_actions_;
  nlohmann::json params = nlohmann::json::object();
  for (std::size_t i = 0; i < params_.names.size(); ++i) {
    const auto& m = params_.values[i];
    params[params_.names[i]] = {
        {"rows", m.rows()},
        {"cols", m.cols()},
        {"data", std::vector<double>(m.data(), m.data() + m.size())},
    };
  }
  j["params"] = std::move(params);
  return j.dump();
}

RecurrentPolicyNet RecurrentPolicyNet::from_json_string(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("kind") != "recurrent_policy" || j.at("format_version") != 1)
    throw std::runtime_error("RecurrentPolicyNet: unrecognized checkpoint format");
  Rng dummy(0);
  RecurrentPolicyNet net = create(j.at("obs_dim"), j.at("hidden"), j.at("n_actions"), dummy);
  for (std::size_t i = 0; i < net.params_.names.size(); ++i) {
    const auto& entry = j.at("params").at(net.params_.names[i]);
    auto& mat = net.params_.values[i];
    if (entry.at("rows") != mat.rows() || entry.at("cols") != mat.cols())
      throw std::runtime_error("RecurrentPolicyNet: checkpoint shape mismatch");
    const auto data = entry.at("data").get<std::vector<double>>();
    mat = Eigen::Map<const nn::Mat>(data.data(), mat.rows(), mat.cols());
  }
  return net;
}

void RecurrentPolicyNet::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << to_json_string() << "\n";
}

RecurrentPolicyNet RecurrentPolicyNet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_string(text);
}

}  // namespace prefshift
