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

#ifndef SKILLAB_ENV_HPP_
#define SKILLAB_ENV_HPP_

#include <cmath>
#include <string>

#include "skillab/rng.hpp"
#include "skillab/types.hpp"

namespace skillab {

enum class EnvKind { kPointMass, kUnicycle };

// State vector layouts (one column per environment):
//   point_mass: [x, y, vx, vy]
//   unicycle:   [x, y, theta, v, omega]   theta wrapped to [-pi, pi)
// Observation layouts (encoder and policy input):
//   point_mass: the state itself
//   unicycle:   [x, y, cos(theta), sin(theta), v, omega]
// The unicycle observation embeds the heading on the unit circle so the
// network input is continuous across the wrap; the transition metric below
// still measures heading changes as wrapped angle differences.

template <typename S>
struct EnvConfig {
  EnvKind kind = EnvKind::kPointMass;
  int num_envs = 24;
  int episode_steps = 300;  // N
  S dt = S(0.02);
  S max_accel = S(10.0);      // m/s^2, scales the acceleration channel(s)
  S max_turn_rate = S(2.5);   // rad/s^2 input scale for the unicycle yaw channel
  S damping = S(1.0);         // 1/s velocity decay
  S w_action_rate = S(0.01);
  S w_energy = S(0.001);
  S w_speed = S(0.002);
  S v_soft = S(2.5);          // m/s soft speed threshold
  bool terminate_out_of_bounds = false;
  S arena_half_width = S(60.0);
  VecX<S> state_weights;      // optional per-dimension weights for d(s, s')

  int state_dim() const { return kind == EnvKind::kPointMass ? 4 : 5; }
  int action_dim() const { return 2; }
  int observation_dim() const { return kind == EnvKind::kPointMass ? 4 : 6; }

  void validate() const {
    if (num_envs < 1) throw ConfigError("env.num_envs must be >= 1");
    if (episode_steps < 1) throw ConfigError("env.episode_steps must be >= 1");
    if (dt <= S(0)) throw ConfigError("env.dt must be positive");
    if (max_accel <= S(0)) throw ConfigError("env.max_accel must be positive");
    if (max_turn_rate <= S(0)) throw ConfigError("env.max_turn_rate must be positive");
    if (damping < S(0)) throw ConfigError("env.damping must be non-negative");
    if (arena_half_width <= S(0)) throw ConfigError("env.arena_half_width must be positive");
    if (state_weights.size() != 0 && state_weights.size() != state_dim()) {
      throw ConfigError("env.state_weights must be empty or match the state dimension");
    }
  }
};

template <typename S>
S wrap_angle(S angle) {
  const S two_pi = S(2) * S(3.14159265358979323846);
  return angle - two_pi * std::floor((angle + S(3.14159265358979323846)) / two_pi);
}

/// d(s, s'): Euclidean norm of the state difference over the full state
/// vector, with angular components differenced on the circle. Optional
/// per-dimension weights multiply the differences before the norm.
template <typename S>
S euclidean_transition_norm(const EnvConfig<S>& cfg,
                            const Eigen::Ref<const VecX<NoDeduce<S>>>& a,
                            const Eigen::Ref<const VecX<NoDeduce<S>>>& b) {
  if (a.size() != cfg.state_dim() || b.size() != cfg.state_dim()) {
    throw DimensionError("euclidean_transition_norm: state layout mismatch");
  }
  VecX<S> diff = b - a;
  if (cfg.kind == EnvKind::kUnicycle) diff[2] = wrap_angle(diff[2]);
  if (cfg.state_weights.size() != 0) diff.array() *= cfg.state_weights.array();
  return diff.norm();
}

/// Planar speed of one environment state.
template <typename S>
S planar_speed(EnvKind kind, const Eigen::Ref<const VecX<NoDeduce<S>>>& state) {
  if (kind == EnvKind::kPointMass) {
    return std::sqrt(state[2] * state[2] + state[3] * state[3]);
  }
  return std::abs(state[3]);
}

/// Writes the network observation for one state column.
template <typename S>
void write_observation(EnvKind kind, const Eigen::Ref<const VecX<NoDeduce<S>>>& state,
                       Eigen::Ref<VecX<S>> out) {
  if (kind == EnvKind::kPointMass) {
    out = state;
    return;
  }
  out[0] = state[0];
  out[1] = state[1];
  out[2] = std::cos(state[2]);
  out[3] = std::sin(state[2]);
  out[4] = state[3];
  out[5] = state[4];
}

template <typename S>
MatX<S> observations(const EnvConfig<S>& cfg, const MatX<S>& states) {
  MatX<S> obs(cfg.observation_dim(), states.cols());
  for (Index j = 0; j < states.cols(); ++j) {
    write_observation<S>(cfg.kind, states.col(j), obs.col(j));
  }
  return obs;
}

/// Batched step outcome. next_states is a snapshot; the stepper owns the
/// live per-environment state.
template <typename S>
struct StepResult {
  MatX<S> next_states;
  VecX<S> extrinsic_reward;
  BoolArray terminated;
  BoolArray truncated;
};

/// Vectorized planar environments. Stepping is deterministic given states and
/// actions; randomness enters only through reset(). Environments are fully
/// independent, so batch results do not depend on any parallel partitioning.
template <typename S>
class VecEnv {
 public:
  explicit VecEnv(EnvConfig<S> cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    states_ = MatX<S>::Zero(cfg_.state_dim(), cfg_.num_envs);
    prev_actions_ = MatX<S>::Zero(cfg_.action_dim(), cfg_.num_envs);
    step_index_ = Eigen::ArrayXi::Zero(cfg_.num_envs);
  }

  const EnvConfig<S>& config() const { return cfg_; }
  const MatX<S>& states() const { return states_; }
  const Eigen::ArrayXi& step_indices() const { return step_index_; }

  /// Point mass starts at the origin at rest; the unicycle starts at the
  /// origin with a uniformly random heading. Envs consume randomness in
  /// index order, so results are independent of partitioning.
  void reset(Rng& rng) {
    for (int i = 0; i < cfg_.num_envs; ++i) reset_env(i, rng);
  }

  void reset_env(int i, Rng& rng) {
    states_.col(i).setZero();
    if (cfg_.kind == EnvKind::kUnicycle) {
      states_(2, i) = static_cast<S>(rng.uniform(-3.14159265358979323846,
                                                 3.14159265358979323846));
    }
    prev_actions_.col(i).setZero();
    step_index_[i] = 0;
  }

  /// Places one environment at an explicit state (fresh episode bookkeeping).
  void set_state(int i, const VecX<S>& state) {
    if (state.size() != cfg_.state_dim()) {
      throw DimensionError("VecEnv::set_state: state layout mismatch");
    }
    if (!state.allFinite()) throw NumericFault("VecEnv::set_state: non-finite state");
    states_.col(i) = state;
    prev_actions_.col(i).setZero();
    step_index_[i] = 0;
  }

  /// Advances every environment by one step. Actions are clipped to
  /// [-1, 1]; non-finite actions are a hard error.
  StepResult<S> step(const MatX<S>& actions) {
    if (actions.rows() != cfg_.action_dim() || actions.cols() != cfg_.num_envs) {
      throw DimensionError("VecEnv::step: action batch shape mismatch");
    }
    if (!actions.allFinite()) throw NumericFault("VecEnv::step: non-finite action");

    StepResult<S> result;
    result.extrinsic_reward.resize(cfg_.num_envs);
    result.terminated = BoolArray::Constant(cfg_.num_envs, false);
    result.truncated = BoolArray::Constant(cfg_.num_envs, false);

    const S decay = S(1) - cfg_.damping * cfg_.dt;
    for (int i = 0; i < cfg_.num_envs; ++i) {
      const VecX<S> a = actions.col(i).cwiseMax(S(-1)).cwiseMin(S(1));
      auto s = states_.col(i);
      if (cfg_.kind == EnvKind::kPointMass) {
        s[2] = decay * s[2] + a[0] * cfg_.max_accel * cfg_.dt;
        s[3] = decay * s[3] + a[1] * cfg_.max_accel * cfg_.dt;
        s[0] += s[2] * cfg_.dt;
        s[1] += s[3] * cfg_.dt;
      } else {
        s[3] = decay * s[3] + a[0] * cfg_.max_accel * cfg_.dt;
        s[4] = decay * s[4] + a[1] * cfg_.max_turn_rate * cfg_.dt;
        s[0] += s[3] * std::cos(s[2]) * cfg_.dt;
        s[1] += s[3] * std::sin(s[2]) * cfg_.dt;
        s[2] = wrap_angle(s[2] + s[4] * cfg_.dt);
      }

      const S speed = planar_speed<S>(cfg_.kind, states_.col(i));
      const S over = std::max(S(0), speed - cfg_.v_soft);
      result.extrinsic_reward[i] =
          -cfg_.w_action_rate * (a - prev_actions_.col(i)).squaredNorm() -
          cfg_.w_energy * a.squaredNorm() - cfg_.w_speed * over * over;

      prev_actions_.col(i) = a;
      step_index_[i] += 1;
      result.truncated[i] = step_index_[i] >= cfg_.episode_steps;
      if (cfg_.terminate_out_of_bounds) {
        result.terminated[i] = std::abs(s[0]) > cfg_.arena_half_width ||
                               std::abs(s[1]) > cfg_.arena_half_width;
      }
    }
    result.next_states = states_;
    return result;
  }

 private:
  EnvConfig<S> cfg_;
  MatX<S> states_;
  MatX<S> prev_actions_;
  Eigen::ArrayXi step_index_;
};

inline std::string to_string(EnvKind kind) {
  return kind == EnvKind::kPointMass ? "point_mass" : "unicycle";
}

}  // namespace skillab

#endif  // SKILLAB_ENV_HPP_
