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

#ifndef SKILLAB_TRAINER_HPP_
#define SKILLAB_TRAINER_HPP_

#include <string>
#include <vector>

#include "skillab/checkpoint.hpp"
#include "skillab/config.hpp"
#include "skillab/env.hpp"
#include "skillab/ppo.hpp"
#include "skillab/rollout.hpp"
#include "skillab/run_io.hpp"
#include "skillab/skills.hpp"

namespace skillab {

/// Everything that evolves during training; a checkpoint is exactly this
/// plus the resolved config text.
template <typename S>
struct TrainerState {
  NetParams<S> encoder;
  AdamState<S> encoder_opt;
  GaussianPolicy<S> policy;
  AdamState<S> policy_opt;
  AdamState<S> log_std_opt;
  NetParams<S> value_net;
  AdamState<S> value_opt;
  DualState<S> dual;
  S lr = S(1e-3);
  Rng rng;
  std::int64_t update_index = 0;
  std::int64_t env_steps = 0;
};

template <typename S>
NetSpec make_net_spec(int input, const std::vector<int>& hidden, int output,
                      Activation activation) {
  NetSpec spec;
  spec.layer_widths.push_back(input);
  for (int w : hidden) spec.layer_widths.push_back(w);
  spec.layer_widths.push_back(output);
  spec.hidden_activation = activation;
  spec.output_activation = OutputActivation::kIdentity;
  return spec;
}

/// Cooperative rollout/update loop: the skill-conditioned policy is trained
/// with clipped PPO on the mixed intrinsic+extrinsic reward while the encoder
/// takes one constrained step per PPO minibatch on the same index stream.
template <typename S>
class Trainer {
 public:
  explicit Trainer(const ExperimentConfig& cfg)
      : cfg_(cfg),
        env_cfg_(cfg.env_config<S>()),
        objective_(cfg.objective_config<S>()),
        env_(env_cfg_) {
    cfg_.validate();

    ppo_.clip_ratio = static_cast<S>(cfg.clip_ratio);
    ppo_.value_clip_ratio = static_cast<S>(cfg.value_clip_ratio);
    ppo_.entropy_coef = static_cast<S>(cfg.entropy_coef);
    ppo_.value_coef = static_cast<S>(cfg.value_coef);
    ppo_.gamma = static_cast<S>(cfg.gamma);
    ppo_.gae_lambda = static_cast<S>(cfg.gae_lambda);
    ppo_.epochs = cfg.epochs;
    ppo_.minibatches = cfg.minibatches;
    ppo_.kl_target = static_cast<S>(cfg.kl_target);
    ppo_.lr_min = static_cast<S>(cfg.lr_min);
    ppo_.lr_max = static_cast<S>(cfg.lr_max);
    ppo_.normalize_advantages = cfg.normalize_advantages;
    ppo_.log_std_min = static_cast<S>(cfg.log_std_min);
    ppo_.log_std_max = static_cast<S>(cfg.log_std_max);

    scales_.pos = static_cast<S>(cfg.obs_scale_pos);
    scales_.vel = static_cast<S>(cfg.obs_scale_vel);
    scales_.ang = static_cast<S>(cfg.obs_scale_ang);
    scales_.skill = static_cast<S>(cfg.obs_scale_skill);

    state_.rng = Rng(cfg.seed);
    const int obs_dim = env_cfg_.observation_dim();
    const int policy_in = obs_dim + cfg.skill_dim;

    state_.encoder = NetParams<S>(make_net_spec<S>(
        obs_dim, cfg.encoder_hidden, cfg.skill_dim,
        cfg.parsed_activation(cfg.encoder_activation)));
    init_fan_in(state_.encoder, state_.rng);
    AdamConfig encoder_adam;
    encoder_adam.learning_rate = cfg.encoder_lr;
    state_.encoder_opt = AdamState<S>(state_.encoder.size(), encoder_adam);

    state_.policy = GaussianPolicy<S>(
        make_net_spec<S>(policy_in, cfg.policy_hidden, env_cfg_.action_dim(),
                         cfg.parsed_activation(cfg.policy_activation)),
        static_cast<S>(cfg.init_log_std));
    init_policy(state_.policy, state_.rng, cfg.policy_final_layer_scale);

    state_.value_net = NetParams<S>(make_net_spec<S>(
        policy_in, cfg.value_hidden, 1, cfg.parsed_activation(cfg.value_activation)));
    init_fan_in(state_.value_net, state_.rng);

    AdamConfig rl_adam;
    rl_adam.learning_rate = cfg.lr_init;
    state_.policy_opt = AdamState<S>(state_.policy.mean_net.size(), rl_adam);
    state_.log_std_opt = AdamState<S>(state_.policy.log_std.size(), rl_adam);
    state_.value_opt = AdamState<S>(state_.value_net.size(), rl_adam);
    state_.lr = static_cast<S>(cfg.lr_init);

    state_.dual.lambda = static_cast<S>(cfg.lambda_init);
    state_.dual.lambda_lr = static_cast<S>(cfg.lambda_lr);
    state_.dual.slack = static_cast<S>(cfg.lambda_slack);
  }

  const ExperimentConfig& config() const { return cfg_; }
  const EnvConfig<S>& env_config() const { return env_cfg_; }
  const ObjectiveConfig<S>& objective() const { return objective_; }
  const ObsScales<S>& scales() const { return scales_; }
  TrainerState<S>& state() { return state_; }
  const TrainerState<S>& state() const { return state_; }

  /// One full training update (collect + 15 x 4 co-training minibatches).
  /// Throws NumericFault if either learner hits non-finite values.
  TrainLogRow update() {
    env_.reset(state_.rng);
    MatX<S> skills(objective_.skill_dim, env_cfg_.num_envs);
    for (int e = 0; e < env_cfg_.num_envs; ++e) {
      skills.col(e) = sample_skill<S>(objective_.skill_dim, objective_.z_max,
                                      objective_.sampling, state_.rng);
    }

    CollectParams<S> collect;
    collect.horizon = env_cfg_.episode_steps;
    collect.w_intrinsic = static_cast<S>(cfg_.w_intrinsic);
    collect.w_extrinsic = static_cast<S>(cfg_.w_extrinsic);
    collect.stochastic = true;

    RolloutBatch<S> batch =
        collect_rollouts(env_, state_.encoder, state_.policy, state_.value_net,
                         skills, objective_, scales_, collect, state_.rng);

    VecX<S> advantages, returns;
    compute_gae(batch, ppo_.gamma, ppo_.gae_lambda, &advantages, &returns);

    S encoder_loss_sum = 0;
    S violation_sum = 0;
    int encoder_steps = 0;
    bool encoder_fault = false;
    MinibatchHook hook = [&](const std::vector<int>& idx) {
      const MatX<S> obs_t = batch.enc_obs_t(Eigen::all, idx);
      const MatX<S> obs_next = batch.enc_obs_next(Eigen::all, idx);
      const VecX<S> distance = batch.state_distance(idx);
      const MatX<S> mb_skills = batch.skills(Eigen::all, idx);
      const EncoderStepStats<S> stats = constrained_encoder_step(
          state_.encoder, state_.encoder_opt, state_.dual, obs_t, obs_next,
          distance, mb_skills, objective_, &encoder_workspace_);
      if (stats.skipped) encoder_fault = true;
      encoder_loss_sum += stats.objective_loss;
      violation_sum += stats.violation_fraction;
      ++encoder_steps;
    };

    const UpdateStats<S> stats =
        ppo_update(state_.policy, state_.policy_opt, state_.log_std_opt,
                   state_.value_net, state_.value_opt, batch, advantages, returns,
                   ppo_, state_.rng, hook);
    if (stats.numeric_fault) {
      throw NumericFault("ppo_update: non-finite loss or gradient at update " +
                         std::to_string(state_.update_index + 1));
    }
    if (encoder_fault) {
      throw NumericFault("encoder update: non-finite loss at update " +
                         std::to_string(state_.update_index + 1));
    }

    state_.lr = adaptive_lr(stats.approx_kl, ppo_.kl_target, state_.lr,
                            ppo_.lr_min, ppo_.lr_max);
    state_.policy_opt.config.learning_rate = static_cast<double>(state_.lr);
    state_.log_std_opt.config.learning_rate = static_cast<double>(state_.lr);
    state_.value_opt.config.learning_rate = static_cast<double>(state_.lr);

    state_.update_index += 1;
    state_.env_steps += static_cast<std::int64_t>(env_cfg_.num_envs) *
                        env_cfg_.episode_steps;

    TrainLogRow row;
    row.update = state_.update_index;
    row.env_steps = state_.env_steps;
    row.lr = static_cast<double>(state_.lr);
    row.policy_loss = static_cast<double>(stats.policy_loss);
    row.value_loss = static_cast<double>(stats.value_loss);
    row.entropy = static_cast<double>(stats.entropy);
    row.approx_kl = static_cast<double>(stats.approx_kl);
    row.encoder_loss =
        encoder_steps > 0 ? static_cast<double>(encoder_loss_sum / encoder_steps) : 0.0;
    row.lambda = static_cast<double>(state_.dual.lambda);
    row.violation_fraction =
        encoder_steps > 0 ? static_cast<double>(violation_sum / encoder_steps) : 0.0;
    row.mean_dphi_norm = static_cast<double>(batch.mean_dphi_norm);
    row.mean_episode_speed = static_cast<double>(batch.mean_episode_speed);
    row.reward_intrinsic = static_cast<double>(batch.reward_intrinsic.mean());
    row.reward_extrinsic = static_cast<double>(batch.reward_extrinsic.mean());
    return row;
  }

  Checkpoint make_checkpoint(const std::string& config_text) const {
    Checkpoint ckpt;
    ckpt.scalar_size = static_cast<int>(sizeof(S));
    ckpt.put_blob("config", config_text);
    ckpt.put_blob("encoder.spec", serialize_net_spec(state_.encoder.spec()));
    ckpt.put_blob("policy.spec", serialize_net_spec(state_.policy.mean_net.spec()));
    ckpt.put_blob("value.spec", serialize_net_spec(state_.value_net.spec()));
    ckpt.put_array("encoder.params", state_.encoder.flat());
    ckpt.put_array("encoder.adam.m", state_.encoder_opt.first_moment);
    ckpt.put_array("encoder.adam.v", state_.encoder_opt.second_moment);
    ckpt.put_array("policy.params", state_.policy.mean_net.flat());
    ckpt.put_array("policy.log_std", state_.policy.log_std);
    ckpt.put_array("policy.adam.m", state_.policy_opt.first_moment);
    ckpt.put_array("policy.adam.v", state_.policy_opt.second_moment);
    ckpt.put_array("policy.log_std.adam.m", state_.log_std_opt.first_moment);
    ckpt.put_array("policy.log_std.adam.v", state_.log_std_opt.second_moment);
    ckpt.put_array("value.params", state_.value_net.flat());
    ckpt.put_array("value.adam.m", state_.value_opt.first_moment);
    ckpt.put_array("value.adam.v", state_.value_opt.second_moment);

    VecX<S> scalars(2);
    scalars << state_.dual.lambda, state_.lr;
    ckpt.put_array("state.scalars", scalars);
    ckpt.put_blob("state.counters",
                  std::to_string(state_.update_index) + "," +
                      std::to_string(state_.env_steps) + "," +
                      std::to_string(state_.encoder_opt.step_count) + "," +
                      std::to_string(state_.policy_opt.step_count) + "," +
                      std::to_string(state_.log_std_opt.step_count) + "," +
                      std::to_string(state_.value_opt.step_count));
    ckpt.put_blob("state.rng", state_.rng.serialize());
    return ckpt;
  }

  void restore(const Checkpoint& ckpt) {
    if (ckpt.scalar_size != static_cast<int>(sizeof(S))) {
      throw DimensionError(
          "checkpoint precision (" + std::to_string(ckpt.scalar_size * 8) +
          "-bit) does not match run.precision (" + std::to_string(sizeof(S) * 8) +
          "-bit)");
    }
    const NetSpec encoder_spec = parse_net_spec(ckpt.blob("encoder.spec"));
    const NetSpec policy_spec = parse_net_spec(ckpt.blob("policy.spec"));
    const NetSpec value_spec = parse_net_spec(ckpt.blob("value.spec"));
    require_spec_match("encoder", encoder_spec, state_.encoder.spec());
    require_spec_match("policy", policy_spec, state_.policy.mean_net.spec());
    require_spec_match("value", value_spec, state_.value_net.spec());

    state_.encoder.mutable_flat() =
        ckpt.array<S>("encoder.params", state_.encoder.size());
    state_.encoder_opt.first_moment =
        ckpt.array<S>("encoder.adam.m", state_.encoder.size());
    state_.encoder_opt.second_moment =
        ckpt.array<S>("encoder.adam.v", state_.encoder.size());
    state_.policy.mean_net.mutable_flat() =
        ckpt.array<S>("policy.params", state_.policy.mean_net.size());
    state_.policy.log_std =
        ckpt.array<S>("policy.log_std", state_.policy.log_std.size());
    state_.policy_opt.first_moment =
        ckpt.array<S>("policy.adam.m", state_.policy.mean_net.size());
    state_.policy_opt.second_moment =
        ckpt.array<S>("policy.adam.v", state_.policy.mean_net.size());
    state_.log_std_opt.first_moment =
        ckpt.array<S>("policy.log_std.adam.m", state_.policy.log_std.size());
    state_.log_std_opt.second_moment =
        ckpt.array<S>("policy.log_std.adam.v", state_.policy.log_std.size());
    state_.value_net.mutable_flat() =
        ckpt.array<S>("value.params", state_.value_net.size());
    state_.value_opt.first_moment =
        ckpt.array<S>("value.adam.m", state_.value_net.size());
    state_.value_opt.second_moment =
        ckpt.array<S>("value.adam.v", state_.value_net.size());

    const VecX<S> scalars = ckpt.array<S>("state.scalars", 2);
    state_.dual.lambda = scalars[0];
    state_.lr = scalars[1];
    state_.policy_opt.config.learning_rate = static_cast<double>(state_.lr);
    state_.log_std_opt.config.learning_rate = static_cast<double>(state_.lr);
    state_.value_opt.config.learning_rate = static_cast<double>(state_.lr);

    const std::string counters = ckpt.blob("state.counters");
    std::stringstream ss(counters);
    std::string item;
    std::vector<std::int64_t> values;
    while (std::getline(ss, item, ',')) values.push_back(std::stoll(item));
    if (values.size() != 6) throw IoError("checkpoint: malformed counters");
    state_.update_index = values[0];
    state_.env_steps = values[1];
    state_.encoder_opt.step_count = values[2];
    state_.policy_opt.step_count = values[3];
    state_.log_std_opt.step_count = values[4];
    state_.value_opt.step_count = values[5];
    state_.rng.deserialize(ckpt.blob("state.rng"));
  }

 private:
  static void require_spec_match(const std::string& name, const NetSpec& found,
                                 const NetSpec& expected) {
    if (found == expected) return;
    throw DimensionError("checkpoint: " + name + " spec " + serialize_net_spec(found) +
                         " does not match configured " + serialize_net_spec(expected));
  }

  ExperimentConfig cfg_;
  EnvConfig<S> env_cfg_;
  ObjectiveConfig<S> objective_;
  VecEnv<S> env_;
  PPOConfig<S> ppo_;
  ObsScales<S> scales_;
  TrainerState<S> state_;
  EncoderStepWorkspace<S> encoder_workspace_;
};

}  // namespace skillab

#endif  // SKILLAB_TRAINER_HPP_
