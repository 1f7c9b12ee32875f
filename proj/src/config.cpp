#include "prefshift/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace prefshift {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
}

template <typename T>
void get_to(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace

PrefSpace ExperimentConfig::make_space() const { return PrefSpace(env.n_bins); }

UserParams ExperimentConfig::make_user_params(const PrefSpace& space) const {
  UserParams p;
  p.lambda = env.lambda;
  p.beta_d = env.beta_d;
  p.beta_c_field = default_beta_c_field(space);
  for (int i = 0; i < space.n(); ++i)
    p.beta_c_field[i] = std::max(p.beta_c_field[i], env.beta_c_floor);
  p.init_pref_mean_deg = env.init_pref_mean_deg;
  p.init_pref_std_deg = env.init_pref_std_deg;
  p.validate(space);
  return p;
}

UserParams ExperimentConfig::make_assumed_params(const PrefSpace& space) const {
  UserParams p = make_user_params(space);
  if (misspecified_choice_model) {
    p.beta_c_field = swapped_beta_c_field(space);
    for (int i = 0; i < space.n(); ++i)
      p.beta_c_field[i] = std::max(p.beta_c_field[i], env.beta_c_floor);
  }
  return p;
}

std::string ExperimentConfig::to_json_string() const {
  json j;
  j["seed"] = seed;
  j["out_dir"] = out_dir;
  j["env"] = {{"n_bins", env.n_bins},
              {"lambda", env.lambda},
              {"beta_d", env.beta_d},
              {"beta_c_floor", env.beta_c_floor},
              {"init_pref_mean_deg", env.init_pref_mean_deg},
              {"init_pref_std_deg", env.init_pref_std_deg}};
  j["dataset"] = {{"n_traj", dataset.n_traj},
                  {"horizon", dataset.horizon},
                  {"train_split", dataset.train_split},
                  {"path", dataset.path}};
  j["model"] = {{"learning_rate", model.learning_rate},
                {"batch_size", model.batch_size},
                {"epochs", model.epochs},
                {"mixture_components", model.mixture_components},
                {"hidden", model.hidden},
                {"arch", model.arch},
                {"choice_mask_prob", model.choice_mask_prob}};
  j["policy"] = {{"batch_size", policy.batch_size},
                 {"minibatch_size", policy.minibatch_size},
                 {"workers", policy.workers},
                 {"learning_rate", policy.learning_rate},
                 {"updates_per_minibatch", policy.updates_per_minibatch},
                 {"policy_clip", policy.policy_clip},
                 {"value_clip", policy.value_clip},
                 {"value_loss_coeff", policy.value_loss_coeff},
                 {"gamma", policy.gamma},
                 {"penalized", policy.penalized},
                 {"nu1", policy.nu1},
                 {"nu2", policy.nu2},
                 {"iterations", policy.iterations},
                 {"horizon", policy.horizon},
                 {"hidden", policy.hidden},
                 {"entropy_coeff", policy.entropy_coeff},
                 {"standardize_advantages", policy.standardize_advantages}};
  j["eval"] = {{"mode", eval.mode == EvalMode::kOracle ? "oracle" : "estimated"},
               {"n_traj", eval.n_traj},
               {"horizon", eval.horizon},
               {"nu1", eval.nu1},
               {"nu2", eval.nu2}};
  j["misspecified_choice_model"] = misspecified_choice_model;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
  const json j = json::parse(text);
  check_keys(j, {"seed", "out_dir", "env", "dataset", "model", "policy", "eval",
                 "misspecified_choice_model"},
             "top level");
  ExperimentConfig c;
  get_to(j, "seed", c.seed);
  get_to(j, "out_dir", c.out_dir);
  get_to(j, "misspecified_choice_model", c.misspecified_choice_model);
  if (j.contains("env")) {
    const json& e = j.at("env");
    check_keys(e, {"n_bins", "lambda", "beta_d", "beta_c_floor", "init_pref_mean_deg",
                   "init_pref_std_deg"},
               "env");
    get_to(e, "n_bins", c.env.n_bins);
    get_to(e, "lambda", c.env.lambda);
    get_to(e, "beta_d", c.env.beta_d);
    get_to(e, "beta_c_floor", c.env.beta_c_floor);
    get_to(e, "init_pref_mean_deg", c.env.init_pref_mean_deg);
    get_to(e, "init_pref_std_deg", c.env.init_pref_std_deg);
  }
  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    check_keys(d, {"n_traj", "horizon", "train_split", "path"}, "dataset");
    get_to(d, "n_traj", c.dataset.n_traj);
    get_to(d, "horizon", c.dataset.horizon);
    get_to(d, "train_split", c.dataset.train_split);
    get_to(d, "path", c.dataset.path);
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    check_keys(m, {"learning_rate", "batch_size", "epochs", "mixture_components", "hidden",
                   "arch", "choice_mask_prob"},
               "model");
    get_to(m, "learning_rate", c.model.learning_rate);
    get_to(m, "batch_size", c.model.batch_size);
    get_to(m, "epochs", c.model.epochs);
    get_to(m, "mixture_components", c.model.mixture_components);
    get_to(m, "hidden", c.model.hidden);
    get_to(m, "arch", c.model.arch);
    get_to(m, "choice_mask_prob", c.model.choice_mask_prob);
  }
  if (j.contains("policy")) {
    const json& p = j.at("policy");
    check_keys(p,
               {"batch_size", "minibatch_size", "workers", "learning_rate",
                "updates_per_minibatch", "policy_clip", "value_clip", "value_loss_coeff", "gamma",
                "penalized", "nu1", "nu2", "iterations", "horizon", "hidden", "entropy_coeff",
                "standardize_advantages"},
               "policy");
    get_to(p, "batch_size", c.policy.batch_size);
    get_to(p, "minibatch_size", c.policy.minibatch_size);
    get_to(p, "workers", c.policy.workers);
    get_to(p, "learning_rate", c.policy.learning_rate);
    get_to(p, "updates_per_minibatch", c.policy.updates_per_minibatch);
    get_to(p, "policy_clip", c.policy.policy_clip);
    get_to(p, "value_clip", c.policy.value_clip);
    get_to(p, "value_loss_coeff", c.policy.value_loss_coeff);
    get_to(p, "gamma", c.policy.gamma);
    get_to(p, "penalized", c.policy.penalized);
    get_to(p, "nu1", c.policy.nu1);
    get_to(p, "nu2", c.policy.nu2);
    get_to(p, "iterations", c.policy.iterations);
    get_to(p, "horizon", c.policy.horizon);
    get_to(p, "hidden", c.policy.hidden);
    get_to(p, "entropy_coeff", c.policy.entropy_coeff);
    get_to(p, "standardize_advantages", c.policy.standardize_advantages);
  }
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    check_keys(e, {"mode", "n_traj", "horizon", "nu1", "nu2"}, "eval");
    if (e.contains("mode")) {
      const std::string mode = e.at("mode");
      if (mode == "oracle")
        c.eval.mode = EvalMode::kOracle;
      else if (mode == "estimated")
        c.eval.mode = EvalMode::kEstimated;
      else
        throw std::invalid_argument("config: eval.mode must be oracle or estimated");
    }
    get_to(e, "n_traj", c.eval.n_traj);
    get_to(e, "horizon", c.eval.horizon);
    get_to(e, "nu1", c.eval.nu1);
    get_to(e, "nu2", c.eval.nu2);
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_string(text);
}

void ExperimentConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << to_json_string() << "\n";
}

}  // namespace prefshift
