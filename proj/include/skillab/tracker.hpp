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

#ifndef SKILLAB_TRACKER_HPP_
#define SKILLAB_TRACKER_HPP_

#include <algorithm>
#include <cmath>
#include <optional>

#include "skillab/env.hpp"
#include "skillab/policy.hpp"
#include "skillab/rollout.hpp"
#include "skillab/skills.hpp"
#include "skillab/types.hpp"

namespace skillab {

template <typename S>
struct GoalSpec {
  Vec2<S> position = Vec2<S>::Zero();
  std::optional<S> heading;   // pose goals (unicycle)
  S tolerance = S(0.5);       // meters
  S heading_tolerance = S(0.4);  // radians, wrapped
  int max_steps = 600;
  int hold_steps = 25;        // consecutive in-tolerance states for success
};

template <typename S>
struct TrackingOptions {
  bool closed_loop = true;
  S gain = S(1);
  bool zero_desired_velocity = false;  // default copies current velocities
};

template <typename S>
struct TrackingResult {
  MatX<S> trajectory;          // state_dim x (evaluated states)
  S final_distance = 0;
  S final_heading_error = 0;   // meaningful when the goal carries a heading
  bool reached = false;
  int steps_to_reach = -1;     // first state index of the successful hold window
  S mean_terminal_speed = 0;   // over the final 10% of evaluated states
  int steps = 0;               // environment steps taken
};

/// Desired state for skill selection: the current state with the goal
/// coordinates substituted (position, and heading when given). Velocity
/// coordinates are copied from the current state unless zeroed.
template <typename S>
VecX<S> make_desired_state(const EnvConfig<S>& cfg, const VecX<NoDeduce<S>>& current,
                           const Vec2<NoDeduce<S>>& goal_position,
                           const std::optional<S>& goal_heading,
                           bool zero_velocity) {
  VecX<S> desired = current;
  desired[0] = goal_position[0];
  desired[1] = goal_position[1];
  if (cfg.kind == EnvKind::kPointMass) {
    if (zero_velocity) {
      desired[2] = S(0);
      desired[3] = S(0);
    }
  } else {
    if (goal_heading) desired[2] = wrap_angle(*goal_heading);
    if (zero_velocity) {
      desired[3] = S(0);
      desired[4] = S(0);
    }
  }
  return desired;
}

/// Skill for the desired latent transition: z = gain * (phi(s_des) - phi(s)),
/// rescaled onto the training ball when its norm exceeds z_max.
template <typename S>
VecX<S> select_skill(const NetParams<S>& encoder, const EnvConfig<S>& env_cfg,
                     const VecX<NoDeduce<S>>& current, const VecX<NoDeduce<S>>& desired,
                     S z_max, S gain = S(1)) {
  MatX<S> pair(current.size(), 2);
  pair.col(0) = current;
  pair.col(1) = desired;
  const MatX<S> latent = encode(encoder, env_cfg, pair);
  VecX<S> z = gain * (latent.col(1) - latent.col(0));
  const S norm = z.norm();
  if (norm > z_max && norm > S(0)) z *= z_max / norm;
  return z;
}

namespace detail {

template <typename S>
struct TrackingProblem {
  bool require_heading = false;
};

template <typename S>
TrackingResult<S> run_tracking(const GaussianPolicy<S>& policy,
                               const NetParams<S>& encoder,
                               const EnvConfig<S>& env_template,
                               const ObsScales<S>& scales, S z_max,
                               const GoalSpec<S>& goal,
                               const TrackingOptions<S>& options,
                               const TrackingProblem<S>& problem, Rng& rng,
                               const VecX<S>* start_state) {
  EnvConfig<S> cfg = env_template;
  cfg.num_envs = 1;
  cfg.episode_steps = goal.max_steps;
  cfg.terminate_out_of_bounds = false;
  VecEnv<S> env(cfg);
  env.reset(rng);
  if (start_state != nullptr) env.set_state(0, *start_state);

  TrackingResult<S> result;
  result.trajectory.resize(cfg.state_dim(), goal.max_steps + 1);

  VecX<S> frozen_skill;  // open-loop skill, fixed at the first step
  int hold_counter = 0;
  int evaluated = 0;
  VecX<S> speeds(goal.max_steps + 1);

  for (int t = 0; t <= goal.max_steps; ++t) {
    const VecX<S> state = env.states().col(0);
    result.trajectory.col(t) = state;
    speeds[t] = planar_speed<S>(cfg.kind, state);
    evaluated = t + 1;

    const S distance = (state.template head<2>() - goal.position).norm();
    bool in_tolerance = distance <= goal.tolerance;
    if (problem.require_heading) {
      const S heading_error = std::abs(wrap_angle(state[2] - *goal.heading));
      in_tolerance = in_tolerance && heading_error <= goal.heading_tolerance;
    }
    hold_counter = in_tolerance ? hold_counter + 1 : 0;
    if (hold_counter >= goal.hold_steps) {
      result.reached = true;
      result.steps_to_reach = t + 1 - goal.hold_steps;
      break;
    }
    if (t == goal.max_steps) break;

    const VecX<S> desired = make_desired_state<S>(
        cfg, state, goal.position,
        problem.require_heading ? goal.heading : std::optional<S>(),
        options.zero_desired_velocity);
    VecX<S> skill;
    if (options.closed_loop || frozen_skill.size() == 0) {
      skill = select_skill(encoder, cfg, state, desired, z_max, options.gain);
      if (!options.closed_loop) frozen_skill = skill;
    } else {
      skill = frozen_skill;
    }

    const MatX<S> obs = observations(cfg, env.states());
    const MatX<S> pin = policy_input(cfg, scales, obs, MatX<S>(skill));
    const MatX<S> action = forward(policy.mean_net, pin);
    env.step(action);
    result.steps = t + 1;
  }

  const VecX<S> last = result.trajectory.col(evaluated - 1);
  result.final_distance = (last.template head<2>() - goal.position).norm();
  if (goal.heading && cfg.kind == EnvKind::kUnicycle) {
    result.final_heading_error = std::abs(wrap_angle(last[2] - *goal.heading));
  }
  const int tail = std::max(1, evaluated / 10);
  result.mean_terminal_speed = speeds.segment(evaluated - tail, tail).mean();
  result.trajectory.conservativeResize(Eigen::NoChange, evaluated);
  return result;
}

}  // namespace detail

/// Closed-loop (default) or open-loop position tracking. The skill is the
/// latent difference toward the goal, recomputed every step in closed loop
/// and frozen at the first step in open loop. Success means holding the
/// position tolerance for hold_steps consecutive states.
template <typename S>
TrackingResult<S> track_goal(const GaussianPolicy<S>& policy,
                             const NetParams<S>& encoder,
                             const EnvConfig<S>& env_cfg, const ObsScales<S>& scales,
                             S z_max, const GoalSpec<S>& goal,
                             const TrackingOptions<S>& options, Rng& rng,
                             const VecX<S>* start_state = nullptr) {
  detail::TrackingProblem<S> problem;
  problem.require_heading = false;
  return detail::run_tracking(policy, encoder, env_cfg, scales, z_max, goal,
                              options, problem, rng, start_state);
}

/// Joint position + heading tracking for 3-D latent models on the unicycle.
/// The desired state carries the goal heading, and success additionally
/// requires the wrapped heading error to stay inside heading_tolerance.
template <typename S>
TrackingResult<S> track_heading_goal(const GaussianPolicy<S>& policy,
                                     const NetParams<S>& encoder,
                                     const EnvConfig<S>& env_cfg,
                                     const ObsScales<S>& scales, S z_max,
                                     const GoalSpec<S>& goal,
                                     const TrackingOptions<S>& options, Rng& rng,
                                     const VecX<S>* start_state = nullptr) {
  if (env_cfg.kind != EnvKind::kUnicycle) {
    throw DimensionError("track_heading_goal: requires the unicycle environment");
  }
  if (!goal.heading) {
    throw DimensionError("track_heading_goal: goal carries no heading");
  }
  if (encoder.spec().output_width() != 3) {
    throw DimensionError("track_heading_goal: needs a 3-D latent model, got " +
                         std::to_string(encoder.spec().output_width()) + "-D");
  }
  detail::TrackingProblem<S> problem;
  problem.require_heading = true;
  return detail::run_tracking(policy, encoder, env_cfg, scales, z_max, goal,
                              options, problem, rng, start_state);
}

}  // namespace skillab

#endif  // SKILLAB_TRACKER_HPP_
