#include "prefshift/pref_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace prefshift {

namespace {

constexpr double kKappaShift = 6.907755278982137;  // ln(1000): kappa ~ 1 at raw output 0
// Smoothing of the direction-vector norm; keeps gradients bounded when the
// head output sits near the origin (e.g. at zero-bias initialization).
constexpr double kDirEps2 = 1e-4;
constexpr double kProbEps = 1e-12;

int argmax_first(const Eigen::VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

double kappa_transform(double c) {
  const double s = 1.0 / (1.0 + std::exp(-(c - kKappaShift)));
  return kKappaFloor + (kKappaCap - kKappaFloor) * s;
}

}  // namespace

std::string task_name(ModelTask task) {
  switch (task) {
    case ModelTask::kFuture: return "future";
    case ModelTask::kInitial: return "initial";
    case ModelTask::kCounterfactual: return "counterfactual";
  }
  return "?";
}

ModelTask task_from_name(const std::string& name) {
  if (name == "future") return ModelTask::kFuture;
  if (name == "initial") return ModelTask::kInitial;
  if (name == "counterfactual") return ModelTask::kCounterfactual;
  throw std::invalid_argument("unknown model task: " + name);
}

void TrainConfig::validate() const {
  if (learning_rate <= 0 || batch_size <= 0 || epochs <= 0 || mixture_components <= 0 ||
      hidden <= 0)
    throw std::invalid_argument("TrainConfig: all values must be positive");
  if (arch != "gru") throw std::invalid_argument("TrainConfig: unknown arch " + arch);
}

SequenceModel SequenceModel::create(ModelTask task, int n_bins, int horizon, int hidden,
                                    int mixture_components, Rng& rng) {
  SequenceModel m;
  m.task_ = task;
  m.n_bins_ = n_bins;
  m.horizon_ = horizon;
  m.hidden_ = hidden;
  m.mixture_components_ = mixture_components;
  const int in = m.input_dim();
  const int k4 = 4 * mixture_components;
  auto& p = m.params_;
  p.add("Wz", in, hidden);
  p.add("Uz", hidden, hidden);
  p.add("bz", 1, hidden);
  p.add("Wr", in, hidden);
  p.add("Ur", hidden, hidden);
  p.add("br", 1, hidden);
  p.add("Wh", in, hidden);
  p.add("Uh", hidden, hidden);
  p.add("bh", 1, hidden);
  p.add("Wc", n_bins, hidden);
  p.add("b0", 1, hidden);
  p.add("Wo", hidden, k4);
  p.add("bo", 1, k4);
  glorot_init(p, rng);
  return m;
}

Eigen::VectorXd SequenceModel::encode_input(const Slate& slate, int choice) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(input_dim());
  x.head(n_bins_) = slate.probs;
  if (choice >= 0) {
    x[n_bins_ + choice] = 1.0;
    x[2 * n_bins_] = 1.0;
  }
  return x;
}

Eigen::VectorXd SequenceModel::initial_hidden(const BeliefVec* cond) const {
  const bool wants = task_ == ModelTask::kCounterfactual;
  if (wants && cond == nullptr)
    throw std::invalid_argument("SequenceModel: counterfactual model needs an initial belief");
  if (!wants && cond != nullptr)
    throw std::invalid_argument("SequenceModel: conditioning only supported for counterfactual");
  const auto& p = params_;
  Eigen::VectorXd pre = p[p.index_of("b0")].row(0).transpose();
  if (cond) pre += p[p.index_of("Wc")].transpose() * (*cond);
  return pre.array().tanh();
}

void SequenceModel::advance(Eigen::VectorXd& hidden, const Slate& slate, int choice) const {
  const Eigen::VectorXd x = encode_input(slate, choice);
  const auto& p = params_;
  auto gate = [&](const char* w, const char* u, const char* b) {
    return (p[p.index_of(w)].transpose() * x + p[p.index_of(u)].transpose() * hidden +
            p[p.index_of(b)].row(0).transpose())
        .eval();
  };
  const Eigen::ArrayXd z = 1.0 / (1.0 + (-gate("Wz", "Uz", "bz").array()).exp());
  const Eigen::ArrayXd r = 1.0 / (1.0 + (-gate("Wr", "Ur", "br").array()).exp());
  const Eigen::VectorXd rh = (r * hidden.array()).matrix();
  const Eigen::ArrayXd hh = (p[p.index_of("Wh")].transpose() * x +
                             p[p.index_of("Uh")].transpose() * rh +
                             p[p.index_of("bh")].row(0).transpose())
                                .array()
                                .tanh();
  hidden = ((1.0 - z) * hidden.array() + z * hh).matrix();
}

MixtureBelief SequenceModel::mixture_at(const Eigen::VectorXd& hidden) const {
  const auto& p = params_;
  const Eigen::VectorXd o = p[p.index_of("Wo")].transpose() * hidden +
                            p[p.index_of("bo")].row(0).transpose();
  const int k = mixture_components_;
  Eigen::VectorXd wlogits = o.segment(3 * k, k);
  Eigen::VectorXd w = (wlogits.array() - wlogits.maxCoeff()).exp();
  w /= w.sum();
  MixtureBelief belief;
  belief.components.resize(k);
  for (int i = 0; i < k; ++i) {
    const double a = o[i], b = o[k + i], c = o[2 * k + i];
    const double rhat = std::hypot(a, b);
    const double r = std::sqrt(a * a + b * b + kDirEps2);
    auto& comp = belief.components[i];
    comp.mean_deg = std::atan2(b, a) * 180.0 / M_PI;
    comp.concentration = std::max(kappa_transform(c) * (rhat / r), 1e-9);
    comp.weight = w[i];
  }
  return belief;
}

SeqExample make_example(const SequenceModel& model, ChoiceModel& cm, const Trajectory& traj,
                        bool mask_choices, const BeliefVec* cond) {
  SeqExample ex;
  const int len = traj.length();
  const int first = model.task() == ModelTask::kInitial ? 1 : 0;
  const int n = model.n_bins();
  ex.cond = cond ? *cond : Eigen::VectorXd::Zero(n);
  if (model.task() == ModelTask::kInitial) {
    // Every prediction position targets the held-out first step.
    for (int p = first - 1; p < len; ++p)
      ex.loss_cols.push_back(cm.likelihood(traj.slates[0], traj.choices[0]));
    for (int j = first; j < len; ++j)
      ex.inputs.push_back(model.encode_input(traj.slates[j], traj.choices[j]));
  } else {
    for (int p = 0; p < len; ++p)
      ex.loss_cols.push_back(cm.likelihood(traj.slates[p], traj.choices[p]));
    for (int j = 0; j + 1 < len; ++j)
      ex.inputs.push_back(
          model.encode_input(traj.slates[j], mask_choices ? -1 : traj.choices[j]));
  }
  return ex;
}

ModelTapeForward model_tape_forward(nn::Tape& tape, const SequenceModel& model,
                                    const std::vector<const SeqExample*>& batch) {
  if (batch.empty()) throw std::invalid_argument("model_tape_forward: empty batch");
  const int B = static_cast<int>(batch.size());
  const int n = model.n_bins();
  const int k = model.mixture_components();
  const int steps = static_cast<int>(batch[0]->inputs.size());
  const int positions = steps + 1;
  for (const auto* ex : batch)
    if (static_cast<int>(ex->inputs.size()) != steps ||
        static_cast<int>(ex->loss_cols.size()) != positions)
      throw std::invalid_argument("model_tape_forward: ragged batch");

  ModelTapeForward fwd;
  const auto& ps = model.params();
  for (const auto& v : ps.values) fwd.param_nodes.push_back(tape.leaf(v));
  auto pid = [&](const char* name) { return fwd.param_nodes[ps.index_of(name)]; };

  Eigen::RowVectorXd cos_row(n), sin_row(n);
  for (int i = 0; i < n; ++i) {
    const double theta = 2.0 * M_PI * i / n;
    cos_row[i] = std::cos(theta);
    sin_row[i] = std::sin(theta);
  }
  const int cos_node = tape.constant(cos_row);
  const int sin_node = tape.constant(sin_row);

  nn::Mat cond_mat(B, n);
  for (int i = 0; i < B; ++i) cond_mat.row(i) = batch[i]->cond.transpose();
  int h = tape.tanh_(tape.add(tape.matmul(tape.constant(cond_mat), pid("Wc")), pid("b0")));

  auto head = [&](int hidden) {
    const int o = tape.add(tape.matmul(hidden, pid("Wo")), pid("bo"));
    const int w = tape.softmax_rows(tape.slice_cols(o, 3 * k, k));
    int belief = -1;
    for (int i = 0; i < k; ++i) {
      const int a = tape.slice_cols(o, i, 1);
      const int b = tape.slice_cols(o, k + i, 1);
      const int c = tape.slice_cols(o, 2 * k + i, 1);
      const int r = tape.sqrt_(tape.add_scalar(tape.add(tape.square(a), tape.square(b)), kDirEps2));
      const int proj = tape.add(tape.matmul(a, cos_node), tape.matmul(b, sin_node));
      const int cosdiff = tape.div_colbcast(proj, r);
      const int kap = tape.add_scalar(
          tape.scale(tape.sigmoid(tape.add_scalar(c, -kKappaShift)), kKappaCap - kKappaFloor),
          kKappaFloor);
      const int comp = tape.softmax_rows(tape.mul_colbcast(tape.add_scalar(cosdiff, -1.0), kap));
      const int weighted = tape.mul_colbcast(comp, tape.slice_cols(w, i, 1));
      belief = belief < 0 ? weighted : tape.add(belief, weighted);
    }
    return belief;
  };

  auto gru_step = [&](int hidden, int x) {
    const int z = tape.sigmoid(
        tape.add(tape.add(tape.matmul(x, pid("Wz")), tape.matmul(hidden, pid("Uz"))), pid("bz")));
    const int r = tape.sigmoid(
        tape.add(tape.add(tape.matmul(x, pid("Wr")), tape.matmul(hidden, pid("Ur"))), pid("br")));
    const int hh = tape.tanh_(tape.add(
        tape.add(tape.matmul(x, pid("Wh")), tape.matmul(tape.mul(r, hidden), pid("Uh"))),
        pid("bh")));
    return tape.add(tape.mul(tape.one_minus(z), hidden), tape.mul(z, hh));
  };

  int nll_total = -1;
  for (int p = 0; p < positions; ++p) {
    const int belief = head(h);
    fwd.belief_nodes.push_back(belief);
    nn::Mat loss_mat(B, n);
    for (int i = 0; i < B; ++i) loss_mat.row(i) = batch[i]->loss_cols[p].transpose();
    const int prob = tape.add_scalar(
        tape.sum_rows(tape.mul(belief, tape.constant(loss_mat))), kProbEps);
    const int nll = tape.scale(tape.log_(prob), -1.0);
    nll_total = nll_total < 0 ? nll : tape.add(nll_total, nll);
    if (p < steps) {
      nn::Mat x_mat(B, model.input_dim());
      for (int i = 0; i < B; ++i) x_mat.row(i) = batch[i]->inputs[p].transpose();
      h = gru_step(h, tape.constant(x_mat));
    }
  }
  fwd.loss_node = tape.scale(tape.mean_all(nll_total), 1.0 / positions);
  return fwd;
}

LearnedPredictor::LearnedPredictor(const SequenceModel& model, const PrefSpace& space,
                                   std::optional<BeliefVec> cond)
    : model_(&model), space_(space), cond_(std::move(cond)) {
  reset();
}

void LearnedPredictor::reset() {
  hidden_ = model_->initial_hidden(cond_ ? &*cond_ : nullptr);
}

void LearnedPredictor::observe(const Slate& slate, int choice) {
  model_->advance(hidden_, slate, choice);
}

BeliefVec LearnedPredictor::belief() {
  return density_at_bins(space_, model_->mixture_at(hidden_));
}

std::unique_ptr<SeqPredictor> LearnedPredictor::clone() const {
  return std::make_unique<LearnedPredictor>(*this);
}

OraclePredictor::OraclePredictor(NhmmEngine& engine, std::optional<BeliefVec> init)
    : engine_(&engine), init_(std::move(init)) {
  reset();
}

void OraclePredictor::reset() { belief_ = init_ ? *init_ : engine_->prior(); }

void OraclePredictor::observe(const Slate& slate, int choice) {
  const SlateOps& ops = engine_->ops_for(slate);
  if (choice >= 0) belief_ = engine_->filter_step(belief_, slate, choice);
  belief_ = NhmmEngine::predict_step(belief_, ops.transition);
}

std::unique_ptr<SeqPredictor> OraclePredictor::clone() const {
  return std::make_unique<OraclePredictor>(*this);
}

BeliefVec corrected_initial_belief(const SequenceModel& initial_model, const PrefSpace& space,
                                   ChoiceModel& cm, const std::vector<Slate>& slates,
                                   const std::vector<int>& choices, int prefix_len) {
  if (initial_model.task() != ModelTask::kInitial)
    throw std::invalid_argument("corrected_initial_belief: wrong model task");
  Eigen::VectorXd h = initial_model.initial_hidden(nullptr);
  for (int j = 1; j < prefix_len; ++j) initial_model.advance(h, slates[j], choices[j]);
  BeliefVec belief = density_at_bins(space, initial_model.mixture_at(h));
  if (prefix_len >= 1)
    belief = bayes_correct_initial(space, cm.params(), belief, slates[0], choices[0]);
  return belief;
}

namespace {

double quick_val_nll(const SequenceModel& model, const std::vector<Trajectory>& val,
                     const PrefSpace& space, ChoiceModel& cm, const SequenceModel* initial_model) {
  double total = 0.0;
  long count = 0;
  for (const auto& traj : val) {
    std::optional<BeliefVec> cond;
    if (model.task() == ModelTask::kCounterfactual)
      cond = corrected_initial_belief(*initial_model, space, cm, traj.slates, traj.choices,
                                      traj.length());
    if (model.task() == ModelTask::kInitial) {
      Eigen::VectorXd h = model.initial_hidden(nullptr);
      for (int t = 0; t < traj.length(); ++t) {
        const BeliefVec b = density_at_bins(space, model.mixture_at(h));
        const Eigen::VectorXd cd = cm.choice_belief(b, traj.slates[0]);
        total += -std::log(cd[traj.choices[0]] + kProbEps);
        ++count;
        if (t < traj.length() - 1) model.advance(h, traj.slates[t + 1], traj.choices[t + 1]);
      }
    } else {
      LearnedPredictor pred(model, space, cond);
      for (int t = 0; t < traj.length(); ++t) {
        const Eigen::VectorXd cd = cm.choice_belief(pred.belief(), traj.slates[t]);
        total += -std::log(cd[traj.choices[t]] + kProbEps);
        ++count;
        pred.observe(traj.slates[t], traj.choices[t]);
      }
    }
  }
  return count ? total / count : 0.0;
}

}  // namespace

SequenceModel train_sequence_model(ModelTask task, const std::vector<Trajectory>& train_set,
                                   const std::vector<Trajectory>& val_set, const PrefSpace& space,
                                   const UserParams& assumed_params, const TrainConfig& cfg,
                                   Rng& rng, const SequenceModel* initial_model,
                                   std::ostream* log) {
  cfg.validate();
  if (train_set.empty()) throw std::invalid_argument("train_sequence_model: empty dataset");
  if (task == ModelTask::kCounterfactual && initial_model == nullptr)
    throw std::invalid_argument("train_sequence_model: counterfactual task needs initial model");

  int horizon = 0;
  for (const auto& t : train_set) horizon = std::max(horizon, t.length());
  Rng init_rng = rng.split(0xA11CE);
  SequenceModel model = SequenceModel::create(task, space.n(), horizon, cfg.hidden,
                                              cfg.mixture_components, init_rng);
  ChoiceModel cm(space, assumed_params);

  nn::AdamOptimizer opt(cfg.learning_rate);
  Rng cond_rng = rng.split(0xC09D);
  std::vector<int> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng = rng.split(0x5417);
  Rng mask_rng = rng.split(0x3A5C);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with our own stream for reproducibility.
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
      const int j = static_cast<int>(shuffle_rng.uniform01() * (i + 1));
      std::swap(order[i], order[j]);
    }
    double epoch_loss = 0.0;
    int n_batches = 0;
    for (std::size_t at = 0; at < order.size(); at += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), at + cfg.batch_size);
      // Group by length so each tape batch is rectangular.
      std::vector<int> idx(order.begin() + at, order.begin() + end);
      std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return train_set[a].length() < train_set[b].length();
      });
      std::size_t lo = 0;
      while (lo < idx.size()) {
        std::size_t hi = lo;
        while (hi < idx.size() &&
               train_set[idx[hi]].length() == train_set[idx[lo]].length())
          ++hi;
        std::vector<SeqExample> storage;
        storage.reserve(hi - lo);
        std::vector<const SeqExample*> batch;
        for (std::size_t i = lo; i < hi; ++i) {
          const int ti = idx[i];
          const Trajectory& traj = train_set[ti];
          const bool mask = task == ModelTask::kCounterfactual &&
                            mask_rng.uniform01() < cfg.choice_mask_prob;
          std::optional<BeliefVec> cond;
          if (task == ModelTask::kCounterfactual) {
            // Condition on initial beliefs of every sharpness the model will
            // see at inference time, from the bare prior (prefix 0) to the
            // full-evidence posterior, by drawing a random prefix length.
            const int prefix =
                static_cast<int>(cond_rng.uniform01() * (traj.length() + 1));
            cond = corrected_initial_belief(*initial_model, space, cm, traj.slates,
                                            traj.choices, prefix);
          }
          storage.push_back(make_example(model, cm, traj, mask, cond ? &*cond : nullptr));
          batch.push_back(&storage.back());
        }
        nn::Tape tape;
        const ModelTapeForward fwd = model_tape_forward(tape, model, batch);
        const double loss = tape.value(fwd.loss_node)(0, 0);
        if (!std::isfinite(loss))
          throw std::runtime_error("train_sequence_model: non-finite loss at epoch " +
                                   std::to_string(epoch));
        tape.backward(fwd.loss_node);
        std::vector<nn::Mat> grads;
        grads.reserve(fwd.param_nodes.size());
        for (int nid : fwd.param_nodes) grads.push_back(tape.grad(nid));
        opt.step(model.params(), grads);
        epoch_loss += loss * static_cast<double>(hi - lo);
        ++n_batches;
        lo = hi;
      }
    }
    if (log) {
      const double val_nll =
          val_set.empty() ? 0.0 : quick_val_nll(model, val_set, space, cm, initial_model);
      (*log) << "epoch " << epoch << " train_loss "
             << epoch_loss / static_cast<double>(train_set.size()) << " val_choice_nll "
             << val_nll << "\n";
    }
  }
  return model;
}

PredictionMetrics evaluate_future_predictions(
    const std::function<std::unique_ptr<SeqPredictor>(const Trajectory&)>& make_predictor,
    const std::vector<Trajectory>& split, ChoiceModel& cm) {
  if (split.empty()) throw std::invalid_argument("evaluate_future_predictions: empty split");
  const int horizon = split[0].length();
  PredictionMetrics m;
  m.choice_nll_per_t = Eigen::VectorXd::Zero(horizon);
  m.choice_acc_per_t = Eigen::VectorXd::Zero(horizon);
  m.pref_nll_per_t = Eigen::VectorXd::Zero(horizon);
  m.pref_acc_per_t = Eigen::VectorXd::Zero(horizon);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(horizon);
  bool any_prefs = false;
  for (const auto& traj : split) {
    auto pred = make_predictor(traj);
    pred->reset();
    for (int t = 0; t < traj.length(); ++t) {
      const BeliefVec b = pred->belief();
      const Eigen::VectorXd cd = cm.choice_belief(b, traj.slates[t]);
      m.choice_nll_per_t[t] += -std::log(cd[traj.choices[t]] + kProbEps);
      m.choice_acc_per_t[t] += argmax_first(cd) == traj.choices[t] ? 1.0 : 0.0;
      if (traj.gt_prefs) {
        any_prefs = true;
        const int u = (*traj.gt_prefs)[t];
        m.pref_nll_per_t[t] += -std::log(b[u] + kProbEps);
        m.pref_acc_per_t[t] += argmax_first(b) == u ? 1.0 : 0.0;
      }
      counts[t] += 1.0;
      pred->observe(traj.slates[t], traj.choices[t]);
    }
  }
  m.choice_nll_per_t.array() /= counts.array();
  m.choice_acc_per_t.array() /= counts.array();
  if (any_prefs) {
    m.pref_nll_per_t.array() /= counts.array();
    m.pref_acc_per_t.array() /= counts.array();
  }
  m.choice_nll = m.choice_nll_per_t.mean();
  m.choice_acc = m.choice_acc_per_t.mean();
  m.pref_nll = m.pref_nll_per_t.mean();
  m.pref_acc = m.pref_acc_per_t.mean();
  return m;
}

PredictionMetrics evaluate_initial_predictions(
    const std::function<BeliefVec(const Trajectory&, int upto, bool corrected)>& initial_belief,
    const std::vector<Trajectory>& split, ChoiceModel& cm) {
  if (split.empty()) throw std::invalid_argument("evaluate_initial_predictions: empty split");
  const int horizon = split[0].length();
  PredictionMetrics m;
  m.choice_nll_per_t = Eigen::VectorXd::Zero(horizon);
  m.choice_acc_per_t = Eigen::VectorXd::Zero(horizon);
  m.pref_nll_per_t = Eigen::VectorXd::Zero(horizon);
  m.pref_acc_per_t = Eigen::VectorXd::Zero(horizon);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(horizon);
  for (const auto& traj : split) {
    for (int t = 0; t < traj.length(); ++t) {
      const BeliefVec uncorr = initial_belief(traj, t, false);
      const Eigen::VectorXd cd = cm.choice_belief(uncorr, traj.slates[0]);
      m.choice_nll_per_t[t] += -std::log(cd[traj.choices[0]] + kProbEps);
      m.choice_acc_per_t[t] += argmax_first(cd) == traj.choices[0] ? 1.0 : 0.0;
      if (traj.gt_prefs) {
        const BeliefVec corr = initial_belief(traj, t, true);
        const int u0 = (*traj.gt_prefs)[0];
        m.pref_nll_per_t[t] += -std::log(corr[u0] + kProbEps);
        m.pref_acc_per_t[t] += argmax_first(corr) == u0 ? 1.0 : 0.0;
      }
      counts[t] += 1.0;
    }
  }
  m.choice_nll_per_t.array() /= counts.array();
  m.choice_acc_per_t.array() /= counts.array();
  m.pref_nll_per_t.array() /= counts.array();
  m.pref_acc_per_t.array() /= counts.array();
  m.choice_nll = m.choice_nll_per_t.mean();
  m.choice_acc = m.choice_acc_per_t.mean();
  m.pref_nll = m.pref_nll_per_t.mean();
  m.pref_acc = m.pref_acc_per_t.mean();
  return m;
}

std::string SequenceModel::to_json_string() const {
  nlohmann::json j;
  j["format_version"] = 1;
  j["kind"] = "sequence_model";
  j["task"] = task_name(task_);
  j["n_bins"] = n_bins_;
  j["horizon"] = horizon_;
  j["hidden"] = hidden_;
  j["mixture_components"] = mixture_components_;
  j["arch"] = "gru";
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

SequenceModel SequenceModel::from_json_string(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("kind") != "sequence_model" || j.at("format_version") != 1)
    throw std::runtime_error("SequenceModel: unrecognized checkpoint format");
  Rng dummy(0);
  SequenceModel m = create(task_from_name(j.at("task")), j.at("n_bins"), j.at("horizon"),
                           j.at("hidden"), j.at("mixture_components"), dummy);
  for (std::size_t i = 0; i < m.params_.names.size(); ++i) {
    const auto& entry = j.at("params").at(m.params_.names[i]);
    auto& mat = m.params_.values[i];
    if (entry.at("rows") != mat.rows() || entry.at("cols") != mat.cols())
      throw std::runtime_error("SequenceModel: checkpoint shape mismatch");
    const auto data = entry.at("data").get<std::vector<double>>();
    mat = Eigen::Map<const nn::Mat>(data.data(), mat.rows(), mat.cols());
  }
  return m;
}

void SequenceModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << to_json_string() << "\n";
}

SequenceModel SequenceModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_string(text);
}

}  // namespace prefshift
