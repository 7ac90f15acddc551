// Copyright 2026 The skillab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SKILLAB_CONFIG_HPP_
#define SKILLAB_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "skillab/env.hpp"
#include "skillab/skills.hpp"
#include "skillab/types.hpp"

namespace skillab {

/// Every tunable of a run, grouped by the section names used in the
/// line-oriented `key = value` config files. Unknown keys are hard errors.
/// All values below are the documented defaults.
struct ExperimentConfig {
  // [run]
  std::uint64_t seed = 1;
  int updates = 1000;
  int checkpoint_every = 50;
  std::string precision = "double";  // "double" | "single"

  // [env]
  std::string env_kind = "point_mass";  // "point_mass" | "unicycle"
  int num_envs = 24;
  int episode_steps = 300;
  double dt = 0.02;
  double max_accel = 10.0;
  double max_turn_rate = 2.5;
  double damping = 1.0;
  double w_action_rate = 0.01;
  double w_energy = 0.001;
  double w_speed = 0.002;
  double v_soft = 2.5;
  bool terminate_out_of_bounds = false;
  double arena_half_width = 60.0;
  std::vector<double> state_weights;  // empty = unweighted metric

  // [objective]
  std::string objective_kind = "ours";  // "ours" | "lsd" | "metra"
  int skill_dim = 2;
  double z_max = 50.0;
  double sigma = 0.0;  // <= 0 selects 1 / z_max^2
  double beta = 5.0;
  std::string skill_sampling = "uniform_ball";  // | "uniform_radius"
  double lambda_init = 30.0;
  double lambda_lr = 1e-4;
  double lambda_slack = 1e-6;
  double encoder_lr = 5e-3;
  std::vector<int> encoder_hidden = {64, 64};
  std::string encoder_activation = "relu";  // "relu" | "elu"

  // [ppo]
  double clip_ratio = 0.2;
  double value_clip_ratio = 0.2;
  double entropy_coef = 0.1;
  double value_coef = 1.0;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  int epochs = 15;
  int minibatches = 4;
  double kl_target = 8e-3;
  double lr_init = 1e-3;
  double lr_min = 1e-5;
  double lr_max = 1e-2;
  std::vector<int> policy_hidden = {128, 128};
  std::string policy_activation = "elu";
  std::vector<int> value_hidden = {128, 128};
  std::string value_activation = "elu";
  double init_log_std = 0.0;
  double log_std_min = -4.0;
  double log_std_max = 0.5;
  double policy_final_layer_scale = 0.01;
  double w_intrinsic = 1.0;
  double w_extrinsic = 1.0;
  bool normalize_advantages = true;
  double obs_scale_pos = 0.05;
  double obs_scale_vel = 0.25;
  double obs_scale_ang = 1.0;
  double obs_scale_skill = 0.02;

  // [eval]
  int eval_trajectories = 1000;
  int hist_bins = 30;
  double hist_min = 0.0;
  double hist_max = 3.0;
  double coverage_cell = 0.25;
  bool eval_deterministic_actions = true;

  // [track]
  double track_gain = 1.0;
  double track_tolerance = 0.5;
  double track_heading_tolerance = 0.4;
  int track_hold_steps = 25;
  int track_max_steps = 600;
  std::string track_desired_velocity = "copy";  // "copy" | "zero"

  /// Validates ranges and cross-field constraints; throws ConfigError naming
  /// the offending key.
  void validate() const;

  /// Parses `key = value` text with [section] headers; starts from defaults.
  /// Unknown sections or keys are hard errors that name the key and line.
  static ExperimentConfig parse(const std::string& text);

  /// Applies one "section.key=value" override.
  void apply_override(const std::string& assignment);

  /// Canonical serialization: every key in every section. parse(serialize())
  /// reproduces the config exactly.
  std::string serialize() const;

  EnvKind parsed_env_kind() const;
  ObjectiveKind parsed_objective_kind() const;
  SkillSampling parsed_skill_sampling() const;
  DistanceMetric implied_distance_metric() const;
  Activation parsed_activation(const std::string& name) const;

  template <typename S>
  EnvConfig<S> env_config() const {
    EnvConfig<S> cfg;
    cfg.kind = parsed_env_kind();
    cfg.num_envs = num_envs;
    cfg.episode_steps = episode_steps;
    cfg.dt = static_cast<S>(dt);
    cfg.max_accel = static_cast<S>(max_accel);
    cfg.max_turn_rate = static_cast<S>(max_turn_rate);
    cfg.damping = static_cast<S>(damping);
    cfg.w_action_rate = static_cast<S>(w_action_rate);
    cfg.w_energy = static_cast<S>(w_energy);
    cfg.w_speed = static_cast<S>(w_speed);
    cfg.v_soft = static_cast<S>(v_soft);
    cfg.terminate_out_of_bounds = terminate_out_of_bounds;
    cfg.arena_half_width = static_cast<S>(arena_half_width);
    if (!state_weights.empty()) {
      cfg.state_weights.resize(static_cast<Index>(state_weights.size()));
      for (std::size_t i = 0; i < state_weights.size(); ++i) {
        cfg.state_weights[static_cast<Index>(i)] = static_cast<S>(state_weights[i]);
      }
    }
    return cfg;
  }

  template <typename S>
  ObjectiveConfig<S> objective_config() const {
    ObjectiveConfig<S> cfg;
    cfg.kind = parsed_objective_kind();
    cfg.skill_dim = skill_dim;
    cfg.z_max = static_cast<S>(z_max);
    cfg.sigma = static_cast<S>(sigma);
    cfg.beta = static_cast<S>(beta);
    cfg.distance_metric = implied_distance_metric();
    cfg.episode_steps = episode_steps;
    cfg.sampling = parsed_skill_sampling();
    return cfg;
  }
};

}  // namespace skillab

#endif  // SKILLAB_CONFIG_HPP_
