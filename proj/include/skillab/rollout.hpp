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

#ifndef SKILLAB_ROLLOUT_HPP_
#define SKILLAB_ROLLOUT_HPP_

#include <vector>

#include "skillab/env.hpp"
#include "skillab/policy.hpp"
#include "skillab/skills.hpp"
#include "skillab/types.hpp"

namespace skillab {

/// Fixed per-dimension input scaling for the policy/value networks. The
/// encoder always sees raw observations so the distance constraint keeps its
/// state-space meaning.
template <typename S>
struct ObsScales {
  S pos = S(0.05);
  S vel = S(0.25);
  S ang = S(1.0);
  S skill = S(0.02);

  VecX<S> observation_scale(const EnvConfig<S>& cfg) const {
    VecX<S> scale(cfg.observation_dim());
    if (cfg.kind == EnvKind::kPointMass) {
      scale << pos, pos, vel, vel;
    } else {
      scale << pos, pos, ang, ang, vel, ang;
    }
    return scale;
  }
};

/// Policy/value network input: scaled observation with the (scaled) skill
/// appended. A zero skill_dim yields the plain scaled observation, which is
/// how unconditioned (task) policies reuse the same trainer.
template <typename S>
MatX<S> policy_input(const EnvConfig<S>& cfg, const ObsScales<S>& scales,
                     const MatX<NoDeduce<S>>& observations,
                     const MatX<NoDeduce<S>>& skills) {
  const VecX<S> obs_scale = scales.observation_scale(cfg);
  MatX<S> input(observations.rows() + skills.rows(), observations.cols());
  input.topRows(observations.rows()) = obs_scale.asDiagonal() * observations;
  if (skills.rows() > 0) {
    input.bottomRows(skills.rows()) = scales.skill * skills;
  }
  return input;
}

/// Flat on-policy batch. Transitions are stored env-major, time-contiguous:
/// index = env * horizon + step, so each environment's episode slice is
/// contiguous in time.
template <typename S>
struct RolloutBatch {
  int num_envs = 0;
  int horizon = 0;

  MatX<S> policy_obs;     // (obs+skill) x M, already scaled
  MatX<S> actions;        // raw sampled actions (pre-clip)
  MatX<S> action_means;   // behavior-policy means (for exact KL)
  VecX<S> old_log_std;    // behavior-policy log std snapshot
  VecX<S> log_probs;
  VecX<S> values;
  VecX<S> next_values;    // V(s_{t+1}) with pre-reset states at boundaries
  VecX<S> rewards;        // mixed reward driving the update
  VecX<S> reward_intrinsic;
  VecX<S> reward_extrinsic;
  BoolArray terminated;
  BoolArray truncated;

  MatX<S> enc_obs_t;      // raw encoder observations of s_t
  MatX<S> enc_obs_next;   // ... and s_{t+1}
  VecX<S> state_distance; // d(s_t, s_{t+1})
  MatX<S> skills;         // skill active at each transition

  // Collection-time diagnostics (frozen-encoder values).
  S mean_episode_speed = 0;
  S mean_dphi_norm = 0;

  Index size() const { return static_cast<Index>(num_envs) * horizon; }
  Index flat_index(int env, int step) const {
    return static_cast<Index>(env) * horizon + step;
  }
};

template <typename S>
struct CollectParams {
  int horizon = 300;
  S w_intrinsic = S(1);
  S w_extrinsic = S(1);
  bool stochastic = true;
};

/// Runs every environment for `horizon` steps under the frozen policy and
/// encoder snapshots. Skills are fixed per environment and resampled only at
/// episode boundaries (termination or truncation), at which point the
/// environment is reset in place. Intrinsic rewards come from the encoder
/// snapshot taken here. All randomness is drawn from `rng` in a fixed
/// (step-major, then env-index) order.
template <typename S>
RolloutBatch<S> collect_rollouts(VecEnv<S>& env, const NetParams<S>& encoder,
                                 const GaussianPolicy<S>& policy,
                                 const NetParams<S>& value_net,
                                 MatX<S> env_skills,  // skill_dim x num_envs
                                 const ObjectiveConfig<S>& objective,
                                 const ObsScales<S>& scales,
                                 const CollectParams<S>& params, Rng& rng) {
  const EnvConfig<S>& cfg = env.config();
  const int num_envs = cfg.num_envs;
  const int horizon = params.horizon;
  const int skill_dim = static_cast<int>(env_skills.rows());

  RolloutBatch<S> batch;
  batch.num_envs = num_envs;
  batch.horizon = horizon;
  const Index m = batch.size();
  if (m == 0) return batch;

  const Index obs_dim = cfg.observation_dim();
  batch.policy_obs.resize(obs_dim + skill_dim, m);
  batch.actions.resize(cfg.action_dim(), m);
  batch.action_means.resize(cfg.action_dim(), m);
  batch.old_log_std = policy.log_std;
  batch.log_probs.resize(m);
  batch.values.resize(m);
  batch.next_values = VecX<S>::Zero(m);
  batch.rewards.resize(m);
  batch.reward_intrinsic.resize(m);
  batch.reward_extrinsic.resize(m);
  batch.terminated = BoolArray::Constant(m, false);
  batch.truncated = BoolArray::Constant(m, false);
  batch.enc_obs_t.resize(obs_dim, m);
  batch.enc_obs_next.resize(obs_dim, m);
  batch.state_distance.resize(m);
  batch.skills.resize(skill_dim, m);

  const S sigma = objective.resolved_sigma();
  MatX<S> states = env.states();
  MatX<S> obs = observations(cfg, states);
  MatX<S> phi = forward(encoder, obs);

  for (int t = 0; t < horizon; ++t) {
    const MatX<S> pin = policy_input(cfg, scales, obs, env_skills);
    const MatX<S> means = forward(policy.mean_net, pin);
    const MatX<S> actions = params.stochastic
                                ? sample_actions<S>(means, policy.log_std, rng)
                                : means;
    const VecX<S> log_probs = gaussian_log_prob<S>(means, policy.log_std, actions);
    const VecX<S> values = forward(value_net, pin).transpose();

    StepResult<S> result = env.step(actions);
    const MatX<S> next_obs = observations(cfg, result.next_states);
    const MatX<S> next_phi = forward(encoder, next_obs);

    for (int e = 0; e < num_envs; ++e) {
      const Index idx = batch.flat_index(e, t);
      batch.policy_obs.col(idx) = pin.col(e);
      batch.actions.col(idx) = actions.col(e);
      batch.action_means.col(idx) = means.col(e);
      batch.log_probs[idx] = log_probs[e];
      batch.values[idx] = values[e];
      batch.enc_obs_t.col(idx) = obs.col(e);
      batch.enc_obs_next.col(idx) = next_obs.col(e);
      batch.skills.col(idx) = env_skills.col(e);

      const S distance =
          euclidean_transition_norm<S>(cfg, states.col(e), result.next_states.col(e));
      batch.state_distance[idx] = distance;

      const VecX<S> delta_phi = next_phi.col(e) - phi.col(e);
      batch.mean_dphi_norm += delta_phi.norm() / static_cast<S>(m);
      batch.mean_episode_speed +=
          planar_speed<S>(cfg.kind, result.next_states.col(e)) / static_cast<S>(m);

      S r_int;
      if (objective.kind == ObjectiveKind::kOurs) {
        const S error =
            per_step_matching_error<S>(delta_phi, env_skills.col(e), objective.episode_steps);
        r_int = intrinsic_reward(error, sigma);
      } else {
        r_int = baseline_intrinsic_reward<S>(delta_phi, env_skills.col(e));
      }
      batch.reward_intrinsic[idx] = r_int;
      batch.reward_extrinsic[idx] = result.extrinsic_reward[e];
      batch.rewards[idx] =
          params.w_intrinsic * r_int + params.w_extrinsic * result.extrinsic_reward[e];
      batch.terminated[idx] = result.terminated[e];
      batch.truncated[idx] = result.truncated[e];
    }

    // Episode boundaries: bootstrap values from pre-reset states, then reset
    // the finished environments in env-index order and draw fresh skills.
    bool any_boundary = false;
    for (int e = 0; e < num_envs; ++e) {
      if (result.terminated[e] || result.truncated[e]) any_boundary = true;
    }
    const bool final_step = (t == horizon - 1);
    MatX<S> boundary_values;
    if (any_boundary || final_step) {
      const MatX<S> next_pin = policy_input(cfg, scales, next_obs, env_skills);
      boundary_values = forward(value_net, next_pin);
    }
    for (int e = 0; e < num_envs; ++e) {
      const Index idx = batch.flat_index(e, t);
      if (result.truncated[e] || final_step) {
        batch.next_values[idx] = boundary_values(0, e);
      }
      if (result.terminated[e] || result.truncated[e]) {
        env.reset_env(e, rng);
        env_skills.col(e) = sample_skill<S>(skill_dim, objective.z_max,
                                            objective.sampling, rng);
      }
    }

    states = env.states();
    obs = observations(cfg, states);
    if (any_boundary) {
      phi = forward(encoder, obs);
    } else {
      phi = next_phi;
    }
  }

  // Interior next-state values for GAE (boundary slots already filled).
  for (int e = 0; e < num_envs; ++e) {
    for (int t = 0; t + 1 < horizon; ++t) {
      const Index idx = batch.flat_index(e, t);
      if (!batch.truncated[idx]) {
        batch.next_values[idx] = batch.values[idx + 1];
      }
    }
  }
  return batch;
}

/// Generalized advantage estimation over the env-major batch. Termination
/// masks the bootstrap; truncation keeps it (next_values holds the pre-reset
/// state value) but still cuts the recursion so episodes do not leak into
/// each other. Returns are advantages + values.
template <typename S>
void compute_gae(const RolloutBatch<S>& batch, S gamma, S gae_lambda,
                 VecX<S>* advantages, VecX<S>* returns) {
  const Index m = batch.size();
  advantages->resize(m);
  returns->resize(m);
  for (int e = 0; e < batch.num_envs; ++e) {
    S carry = 0;
    for (int t = batch.horizon - 1; t >= 0; --t) {
      const Index idx = batch.flat_index(e, t);
      const bool boundary = batch.terminated[idx] || batch.truncated[idx];
      const S bootstrap = batch.terminated[idx] ? S(0) : batch.next_values[idx];
      const S delta =
          batch.rewards[idx] + gamma * bootstrap - batch.values[idx];
      carry = delta + gamma * gae_lambda * (boundary ? S(0) : carry);
      (*advantages)[idx] = carry;
      (*returns)[idx] = carry + batch.values[idx];
    }
  }
}

}  // namespace skillab

#endif  // SKILLAB_ROLLOUT_HPP_
