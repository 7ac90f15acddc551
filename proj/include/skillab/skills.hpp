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

#ifndef SKILLAB_SKILLS_HPP_
#define SKILLAB_SKILLS_HPP_

#include <cmath>
#include <string>

#include "skillab/adam.hpp"
#include "skillab/env.hpp"
#include "skillab/losses.hpp"
#include "skillab/mlp.hpp"
#include "skillab/rng.hpp"
#include "skillab/types.hpp"

namespace skillab {

enum class ObjectiveKind { kOurs, kLsd, kMetra };
enum class DistanceMetric { kEuclidean, kTemporal };
enum class SkillSampling {
  kUniformBall,    // uniform over the solid ball of radius z_max
  kUniformRadius,  // uniform direction x uniform magnitude
};

template <typename S>
struct ObjectiveConfig {
  ObjectiveKind kind = ObjectiveKind::kOurs;
  int skill_dim = 2;
  S z_max = S(50);
  S sigma = S(0);  // <= 0 selects the default 1 / z_max^2
  S beta = S(5);
  DistanceMetric distance_metric = DistanceMetric::kEuclidean;
  int episode_steps = 300;  // N in the per-step matching error
  SkillSampling sampling = SkillSampling::kUniformBall;

  S resolved_sigma() const {
    return sigma > S(0) ? sigma : S(1) / (z_max * z_max);
  }

  void validate() const {
    if (skill_dim != 2 && skill_dim != 3) {
      throw ConfigError("objective.skill_dim must be 2 or 3");
    }
    if (z_max < S(0)) throw ConfigError("objective.z_max must be non-negative");
    if (beta <= S(0)) throw ConfigError("objective.beta must be positive");
    if (episode_steps < 1) throw ConfigError("objective.episode_steps must be >= 1");
    if (kind == ObjectiveKind::kMetra && distance_metric != DistanceMetric::kTemporal) {
      throw ConfigError("objective.kind=metra requires distance_metric=temporal");
    }
    if (kind != ObjectiveKind::kMetra && distance_metric != DistanceMetric::kEuclidean) {
      throw ConfigError("objective.kind=" + to_string(kind) +
                        " requires distance_metric=euclidean");
    }
  }

  static std::string to_string(ObjectiveKind k) {
    switch (k) {
      case ObjectiveKind::kOurs: return "ours";
      case ObjectiveKind::kLsd: return "lsd";
      default: return "metra";
    }
  }
};

/// Lagrange multiplier state for the latent-distance constraint. The update
/// is pure ascent: lambda never decreases, and the slack keeps satisfied
/// batches from nudging it at the boundary.
template <typename S>
struct DualState {
  S lambda = S(30);
  S lambda_lr = S(1e-4);
  S slack = S(1e-6);
};

/// lambda <- max(0, lambda + lr * mean(max(0, c - slack))).
template <typename S>
void dual_ascent(DualState<S>& dual, S mean_clipped_violation) {
  dual.lambda = std::max(S(0), dual.lambda + dual.lambda_lr * mean_clipped_violation);
}

/// One skill vector, uniform over the ball of radius z_max (or uniform in
/// direction and magnitude with kUniformRadius).
template <typename S>
VecX<S> sample_skill(int skill_dim, S z_max, SkillSampling mode, Rng& rng) {
  if (skill_dim != 2 && skill_dim != 3) {
    throw ConfigError("sample_skill: skill_dim must be 2 or 3");
  }
  if (z_max < S(0)) throw ConfigError("sample_skill: z_max must be non-negative");

  VecX<S> direction(skill_dim);
  if (skill_dim == 2) {
    const double angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    direction << static_cast<S>(std::cos(angle)), static_cast<S>(std::sin(angle));
  } else {
    const double cos_polar = rng.uniform(-1.0, 1.0);
    const double sin_polar = std::sqrt(std::max(0.0, 1.0 - cos_polar * cos_polar));
    const double azimuth = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    direction << static_cast<S>(sin_polar * std::cos(azimuth)),
        static_cast<S>(sin_polar * std::sin(azimuth)),
        static_cast<S>(cos_polar);
  }

  const double u = rng.uniform();
  double radius;
  if (mode == SkillSampling::kUniformBall) {
    radius = (skill_dim == 2) ? std::sqrt(u) : std::cbrt(u);
  } else {
    radius = u;
  }
  return direction * static_cast<S>(radius * static_cast<double>(z_max));
}

/// Latent embedding of environment states: the encoder applied to the
/// observation form of each state column.
template <typename S>
MatX<S> encode(const NetParams<S>& encoder, const EnvConfig<S>& env_cfg,
               const MatX<S>& states) {
  return forward(encoder, observations(env_cfg, states));
}

/// Per-step matching error of Eq-style norm matching:
/// e = || N * delta_phi - z ||^2.
template <typename S>
S per_step_matching_error(const VecX<S>& delta_phi, const VecX<S>& skill, int n) {
  if (n < 1) throw ConfigError("per_step_matching_error: N must be >= 1");
  if (delta_phi.size() != skill.size()) {
    throw DimensionError("per_step_matching_error: dimension mismatch");
  }
  return (static_cast<S>(n) * delta_phi - skill).squaredNorm();
}

/// Column-wise matching errors for a transition batch.
template <typename S>
VecX<S> per_step_matching_error_batch(const MatX<S>& delta_phi,
                                      const MatX<S>& skills, int n) {
  if (n < 1) throw ConfigError("per_step_matching_error: N must be >= 1");
  return (static_cast<S>(n) * delta_phi - skills)
      .colwise()
      .squaredNorm()
      .transpose();
}

/// Norm-matching encoder loss: mean over the batch of the Smooth-L1 of the
/// residual N * delta_phi - z (summed over latent dimensions).
template <typename S>
S norm_matching_loss(const MatX<S>& delta_phi, const MatX<S>& skills, int n, S beta) {
  if (delta_phi.cols() == 0) throw DimensionError("norm_matching_loss: empty batch");
  const MatX<S> residual = static_cast<S>(n) * delta_phi - skills;
  return smooth_l1_batch(residual, beta);
}

/// Alignment objective shared by the LSD and METRA baselines:
/// -mean(delta_phi . z). The two baselines differ only in the constraint
/// metric, not in this loss.
template <typename S>
S alignment_loss(const MatX<S>& delta_phi, const MatX<S>& skills) {
  if (delta_phi.cols() == 0) throw DimensionError("alignment_loss: empty batch");
  return -delta_phi.cwiseProduct(skills).sum() /
         static_cast<S>(delta_phi.cols());
}

/// Constraint residual c = ||delta_phi|| - d. Satisfied when c <= 0.
/// Euclidean metric uses the supplied state distance; temporal distance of
/// adjacent states is 1.
template <typename S>
S constraint_residual(const VecX<S>& delta_phi, DistanceMetric metric,
                      S state_distance) {
  const S d = metric == DistanceMetric::kEuclidean ? state_distance : S(1);
  return delta_phi.norm() - d;
}

template <typename S>
VecX<S> constraint_residual_batch(const MatX<S>& delta_phi, DistanceMetric metric,
                                  const VecX<S>& state_distance) {
  VecX<S> norms = delta_phi.colwise().norm().transpose();
  if (metric == DistanceMetric::kEuclidean) {
    if (state_distance.size() != delta_phi.cols()) {
      throw DimensionError("constraint_residual: state_distance size mismatch");
    }
    return norms - state_distance;
  }
  return norms.array() - S(1);
}

/// Policy reward for the norm-matching objective: r = 1 / (1 + sigma * e),
/// in (0, 1] and strictly decreasing in the matching error.
template <typename S>
S intrinsic_reward(S matching_error, S sigma) {
  if (matching_error < S(0)) throw NumericFault("intrinsic_reward: negative error");
  if (sigma <= S(0)) throw ConfigError("intrinsic_reward: sigma must be positive");
  return S(1) / (S(1) + sigma * matching_error);
}

/// Baseline (LSD/METRA) policy reward: the raw alignment delta_phi . z.
/// Unbounded above, so maximizing it also maximizes ||delta_phi||.
template <typename S>
S baseline_intrinsic_reward(const VecX<S>& delta_phi, const VecX<S>& skill) {
  return delta_phi.dot(skill);
}

/// Episodic matching loss ||(phi(s_T) - phi(s_0)) - z||^2; diagnostics only,
/// training uses the per-step form.
template <typename S>
S episode_matching_loss(const VecX<S>& phi_start, const VecX<S>& phi_end,
                        const VecX<S>& skill) {
  return (phi_end - phi_start - skill).squaredNorm();
}

/// Check of the telescoped episodic bound with the Cauchy-Schwarz factor T:
///   || sum_t (dphi_t - z/T) ||^2  <=  T * sum_t || dphi_t - z/T ||^2.
/// The factor-free form fails already for two equal increments, hence the T.
template <typename S>
struct TelescopingCheck {
  S lhs;
  S rhs;
  bool holds;
};

template <typename S>
TelescopingCheck<S> telescoping_bound_check(const MatX<S>& delta_phi,
                                            const VecX<S>& skill, int steps,
                                            S relative_tolerance = S(1e-9)) {
  if (steps < 1) throw ConfigError("telescoping_bound_check: T must be >= 1");
  if (delta_phi.cols() != steps) {
    throw DimensionError("telescoping_bound_check: expected T transition columns");
  }
  const MatX<S> centered =
      delta_phi.colwise() - VecX<S>(skill / static_cast<S>(steps));
  const S lhs = centered.rowwise().sum().squaredNorm();
  const S rhs = static_cast<S>(steps) * centered.colwise().squaredNorm().sum();
  const bool holds = lhs <= rhs + relative_tolerance * std::max(S(1), rhs);
  return {lhs, rhs, holds};
}

/// Diagnostics from one constrained encoder update.
template <typename S>
struct EncoderStepStats {
  S objective_loss = 0;
  S total_loss = 0;
  S mean_violation = 0;        // mean over the batch of max(0, c)
  S violation_fraction = 0;    // fraction of transitions with c > 0
  S mean_dphi_norm = 0;
  S lambda_after = 0;
  bool skipped = false;        // numeric fault: no update applied
};

/// Reusable forward caches; passing one across repeated same-shape calls
/// avoids reallocating the activation buffers.
template <typename S>
struct EncoderStepWorkspace {
  ForwardCache<S> cache_t;
  ForwardCache<S> cache_next;
};

/// One constrained encoder update: an Adam step on
///   objective + lambda * mean(max(0, c))
/// followed by dual ascent on lambda. obs_t/obs_next hold the observation
/// form of consecutive states (one column per transition); gradients flow
/// into the encoder through both.
template <typename S>
EncoderStepStats<S> constrained_encoder_step(
    NetParams<S>& encoder, AdamState<S>& opt, DualState<S>& dual,
    const MatX<S>& obs_t, const MatX<S>& obs_next, const VecX<S>& state_distance,
    const MatX<S>& skills, const ObjectiveConfig<S>& cfg,
    EncoderStepWorkspace<S>* workspace = nullptr) {
  if (obs_t.cols() != obs_next.cols() || obs_t.cols() != skills.cols()) {
    throw DimensionError("constrained_encoder_step: batch size mismatch");
  }
  const Index batch = obs_t.cols();
  const S inv_batch = S(1) / static_cast<S>(batch);

  EncoderStepWorkspace<S> local;
  EncoderStepWorkspace<S>& ws = workspace ? *workspace : local;
  ForwardCache<S>& cache_t = ws.cache_t;
  ForwardCache<S>& cache_next = ws.cache_next;
  const MatX<S> phi_t = forward(encoder, obs_t, cache_t);
  const MatX<S> phi_next = forward(encoder, obs_next, cache_next);
  const MatX<S> delta_phi = phi_next - phi_t;

  EncoderStepStats<S> stats;
  MatX<S> grad_dphi(delta_phi.rows(), batch);
  if (cfg.kind == ObjectiveKind::kOurs) {
    const MatX<S> residual = static_cast<S>(cfg.episode_steps) * delta_phi - skills;
    stats.objective_loss = smooth_l1_batch(residual, cfg.beta);
    grad_dphi = static_cast<S>(cfg.episode_steps) *
                smooth_l1_batch_grad(residual, cfg.beta);
  } else {
    stats.objective_loss = alignment_loss(delta_phi, skills);
    grad_dphi = -inv_batch * skills;
  }

  const VecX<S> residual_c =
      constraint_residual_batch(delta_phi, cfg.distance_metric, state_distance);
  S violation_sum = 0;
  int violating = 0;
  for (Index j = 0; j < batch; ++j) {
    const S norm = delta_phi.col(j).norm();
    stats.mean_dphi_norm += norm * inv_batch;
    if (residual_c[j] > S(0)) {
      violating += 1;
      violation_sum += residual_c[j];
      if (norm > S(0)) {
        grad_dphi.col(j) += dual.lambda * inv_batch * delta_phi.col(j) / norm;
      }
    }
  }
  stats.mean_violation = violation_sum * inv_batch;
  stats.violation_fraction = static_cast<S>(violating) * inv_batch;
  stats.total_loss = stats.objective_loss + dual.lambda * stats.mean_violation;

  if (!std::isfinite(static_cast<double>(stats.total_loss))) {
    stats.skipped = true;
    stats.lambda_after = dual.lambda;
    return stats;
  }

  Gradients<S> g_next = backward(encoder, cache_next, grad_dphi);
  Gradients<S> g_t = backward(encoder, cache_t, MatX<S>(-grad_dphi));
  const VecX<S> grad_flat = g_next.flat + g_t.flat;
  if (adam_step(encoder, grad_flat, opt) != StepStatus::kOk) {
    stats.skipped = true;
    stats.lambda_after = dual.lambda;
    return stats;
  }

  S clipped_sum = 0;
  for (Index j = 0; j < batch; ++j) {
    clipped_sum += std::max(S(0), residual_c[j] - dual.slack);
  }
  dual_ascent(dual, clipped_sum * inv_batch);
  stats.lambda_after = dual.lambda;
  return stats;
}

inline std::string to_string(ObjectiveKind k) {
  return ObjectiveConfig<double>::to_string(k);
}
inline std::string to_string(DistanceMetric m) {
  return m == DistanceMetric::kEuclidean ? "euclidean" : "temporal";
}
inline std::string to_string(SkillSampling s) {
  return s == SkillSampling::kUniformBall ? "uniform_ball" : "uniform_radius";
}

}  // namespace skillab

#endif  // SKILLAB_SKILLS_HPP_
