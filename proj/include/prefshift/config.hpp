#pragma once

#include <cstdint>
#include <string>

#include "prefshift/metrics.hpp"
#include "prefshift/policy_opt.hpp"
#include "prefshift/pref_model.hpp"

namespace prefshift {

struct EnvConfig {
  int n_bins = 36;
  double lambda = 0.9;
  double beta_d = 96.0;
  double beta_c_floor = 0.65;
  double init_pref_mean_deg = 130.0;
  double init_pref_std_deg = 20.0;
};

struct DatasetConfig {
  int n_traj = 10000;
  int horizon = 10;
  int train_split = 7500;
  std::string path = "dataset.jsonl";
};

/// One canonical document for every experiment knob; CLI flags override
/// individual keys. Unknown keys are rejected to catch typos.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  EnvConfig env;
  DatasetConfig dataset;
  TrainConfig model;
  PGConfig policy;
  EvalConfig eval;
  bool misspecified_choice_model = false;

  PrefSpace make_space() const;
  UserParams make_user_params(const PrefSpace& space) const;
  /// Choice model assumed by estimators/models; the mis-specified variant
  /// swaps the two temperature peaks.
  UserParams make_assumed_params(const PrefSpace& space) const;

  std::string to_json_string() const;
  static ExperimentConfig from_json_string(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace prefshift
