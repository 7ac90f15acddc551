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

#ifndef SKILLAB_METRICS_HPP_
#define SKILLAB_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "skillab/env.hpp"
#include "skillab/policy.hpp"
#include "skillab/rollout.hpp"
#include "skillab/skills.hpp"
#include "skillab/types.hpp"

namespace skillab {

/// Equal-width histogram of per-trajectory statistics. Densities are mass
/// fractions over the in-range bins (they sum to 1 whenever any value lands
/// in range); out-of-range values are counted, never dropped.
struct SpeedHistogram {
  std::vector<double> edges;    // bins + 1 entries
  std::vector<double> density;  // bins entries
  std::vector<long> counts;
  long underflow = 0;
  long overflow = 0;
};

inline SpeedHistogram speed_histogram(const std::vector<double>& values, int bins,
                                      double lo, double hi) {
  if (bins < 1) throw ConfigError("speed_histogram: bins must be >= 1");
  if (hi <= lo) throw ConfigError("speed_histogram: empty range");
  if (values.empty()) throw DimensionError("speed_histogram: no trajectories");
  SpeedHistogram hist;
  hist.edges.resize(static_cast<std::size_t>(bins) + 1);
  const double width = (hi - lo) / bins;
  for (int b = 0; b <= bins; ++b) hist.edges[static_cast<std::size_t>(b)] = lo + b * width;
  hist.counts.assign(static_cast<std::size_t>(bins), 0);
  long in_range = 0;
  for (double v : values) {
    if (v < lo) {
      ++hist.underflow;
      continue;
    }
    if (v >= hi) {
      // The top edge itself belongs to the last bin.
      if (v == hi) {
        ++hist.counts.back();
        ++in_range;
      } else {
        ++hist.overflow;
      }
      continue;
    }
    const int b = std::min(bins - 1, static_cast<int>((v - lo) / width));
    ++hist.counts[static_cast<std::size_t>(b)];
    ++in_range;
  }
  hist.density.assign(static_cast<std::size_t>(bins), 0.0);
  if (in_range > 0) {
    for (int b = 0; b < bins; ++b) {
      hist.density[static_cast<std::size_t>(b)] =
          static_cast<double>(hist.counts[static_cast<std::size_t>(b)]) / in_range;
    }
  }
  return hist;
}

/// Net displacement and path length of an XY trajectory (columns are
/// positions). path >= net by the triangle inequality.
template <typename S>
struct TraveledDistance {
  S net = 0;
  S path = 0;
};

template <typename S>
TraveledDistance<S> traveled_distance(const MatX<NoDeduce<S>>& positions) {
  if (positions.cols() < 1) throw DimensionError("traveled_distance: empty trajectory");
  TraveledDistance<S> out;
  out.net = (positions.col(positions.cols() - 1) - positions.col(0)).norm();
  for (Index t = 0; t + 1 < positions.cols(); ++t) {
    out.path += (positions.col(t + 1) - positions.col(t)).norm();
  }
  return out;
}

/// Fractional ranks with average ties.
inline std::vector<double> fractional_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based average
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

struct SpearmanResult {
  double rho = 0;
  bool degenerate = false;  // zero variance in either variable
};

inline SpearmanResult spearman(const std::vector<double>& x,
                               const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty()) {
    throw DimensionError("spearman: mismatched or empty inputs");
  }
  const std::vector<double> rx = fractional_ranks(x);
  const std::vector<double> ry = fractional_ranks(y);
  const auto all_equal = [](const std::vector<double>& v) {
    for (double value : v) {
      if (value != v.front()) return false;
    }
    return true;
  };
  if (all_equal(rx) || all_equal(ry)) return {0.0, true};

  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return {0.0, true};
  return {sxy / std::sqrt(sxx * syy), false};
}

struct AlignmentResult {
  double mean_cosine = 0;
  long used = 0;
  long filtered = 0;  // zero-norm transitions or skills
  bool degenerate = false;
};

/// Mean cosine between N * delta_phi and z over a transition batch.
template <typename S>
AlignmentResult alignment_score(const MatX<NoDeduce<S>>& delta_phi,
                                const MatX<NoDeduce<S>>& skills, int n) {
  if (delta_phi.cols() != skills.cols()) {
    throw DimensionError("alignment_score: batch size mismatch");
  }
  AlignmentResult out;
  double total = 0;
  for (Index j = 0; j < delta_phi.cols(); ++j) {
    const VecX<S> scaled = static_cast<S>(n) * delta_phi.col(j);
    const double a = static_cast<double>(scaled.norm());
    const double b = static_cast<double>(skills.col(j).norm());
    if (a == 0.0 || b == 0.0) {
      ++out.filtered;
      continue;
    }
    total += static_cast<double>(scaled.dot(skills.col(j))) / (a * b);
    ++out.used;
  }
  if (out.used == 0) {
    out.degenerate = true;
    return out;
  }
  out.mean_cosine = total / static_cast<double>(out.used);
  return out;
}

struct CoverageGrid {
  std::vector<std::pair<long, long>> cells;  // occupied, sorted
  double cell_size = 0;
  long count() const { return static_cast<long>(cells.size()); }
};

/// Rasterizes XY positions onto a square grid and counts occupied cells.
template <typename S>
CoverageGrid coverage_grid(const std::vector<MatX<S>>& trajectories, double cell_size) {
  if (cell_size <= 0) throw ConfigError("coverage_grid: cell_size must be positive");
  std::set<std::pair<long, long>> occupied;
  for (const MatX<S>& positions : trajectories) {
    for (Index t = 0; t < positions.cols(); ++t) {
      const long cx = static_cast<long>(
          std::floor(static_cast<double>(positions(0, t)) / cell_size));
      const long cy = static_cast<long>(
          std::floor(static_cast<double>(positions(1, t)) / cell_size));
      occupied.emplace(cx, cy);
    }
  }
  CoverageGrid grid;
  grid.cell_size = cell_size;
  grid.cells.assign(occupied.begin(), occupied.end());
  return grid;
}

/// One evaluation episode: the skill it ran under, its XY track, per-step
/// latent transitions under the frozen encoder, and per-step state distances.
/// Full state/action/reward streams are filled only when requested.
template <typename S>
struct EvalTrajectory {
  VecX<S> skill;
  S mean_speed = 0;
  MatX<S> positions;       // 2 x (steps + 1)
  MatX<S> delta_phi;       // latent_dim x steps
  VecX<S> state_distance;  // steps
  MatX<S> states;          // state_dim x (steps + 1), record_full only
  MatX<S> actions;         // action_dim x steps, record_full only
  VecX<S> reward_intrinsic;
  VecX<S> reward_extrinsic;
};

/// Rolls out one episode per skill (deterministic actions by default),
/// batching episodes env-config-many at a time. Randomness (unicycle reset
/// headings, optional stochastic actions) is consumed in batch order. With
/// record_full and an objective, the complete per-step trajectory record
/// (states, actions, rewards) is kept for dumping.
template <typename S>
std::vector<EvalTrajectory<S>> collect_eval_trajectories(
    const EnvConfig<S>& env_template, const NetParams<S>& encoder,
    const GaussianPolicy<S>& policy, const ObsScales<S>& scales,
    const std::vector<VecX<S>>& skills, bool deterministic, Rng& rng,
    bool record_full = false, const ObjectiveConfig<S>* objective = nullptr) {
  std::vector<EvalTrajectory<S>> out;
  out.reserve(skills.size());
  const int latent_dim = encoder.spec().output_width();

  std::size_t next = 0;
  while (next < skills.size()) {
    const int batch = static_cast<int>(
        std::min<std::size_t>(env_template.num_envs, skills.size() - next));
    EnvConfig<S> cfg = env_template;
    cfg.num_envs = batch;
    VecEnv<S> env(cfg);
    env.reset(rng);

    MatX<S> skill_mat(skills[0].size(), batch);
    for (int e = 0; e < batch; ++e) skill_mat.col(e) = skills[next + e];

    const int steps = cfg.episode_steps;
    std::vector<EvalTrajectory<S>> chunk(static_cast<std::size_t>(batch));
    for (int e = 0; e < batch; ++e) {
      chunk[e].skill = skill_mat.col(e);
      chunk[e].positions.resize(2, steps + 1);
      chunk[e].positions.col(0) = env.states().col(e).template head<2>();
      chunk[e].delta_phi.resize(latent_dim, steps);
      chunk[e].state_distance.resize(steps);
      if (record_full) {
        chunk[e].states.resize(cfg.state_dim(), steps + 1);
        chunk[e].states.col(0) = env.states().col(e);
        chunk[e].actions.resize(cfg.action_dim(), steps);
        chunk[e].reward_intrinsic = VecX<S>::Zero(steps);
        chunk[e].reward_extrinsic.resize(steps);
      }
    }

    MatX<S> states = env.states();
    MatX<S> obs = observations(cfg, states);
    MatX<S> phi = forward(encoder, obs);
    for (int t = 0; t < steps; ++t) {
      const MatX<S> pin = policy_input(cfg, scales, obs, skill_mat);
      const MatX<S> means = forward(policy.mean_net, pin);
      const MatX<S> actions =
          deterministic ? means : sample_actions<S>(means, policy.log_std, rng);
      const StepResult<S> result = env.step(actions);
      const MatX<S> next_obs = observations(cfg, result.next_states);
      const MatX<S> next_phi = forward(encoder, next_obs);
      for (int e = 0; e < batch; ++e) {
        const VecX<S> delta_phi = next_phi.col(e) - phi.col(e);
        chunk[e].positions.col(t + 1) = result.next_states.col(e).template head<2>();
        chunk[e].delta_phi.col(t) = delta_phi;
        chunk[e].state_distance[t] = euclidean_transition_norm<S>(
            cfg, states.col(e), result.next_states.col(e));
        chunk[e].mean_speed +=
            planar_speed<S>(cfg.kind, result.next_states.col(e)) / static_cast<S>(steps);
        if (record_full) {
          chunk[e].states.col(t + 1) = result.next_states.col(e);
          chunk[e].actions.col(t) = actions.col(e);
          chunk[e].reward_extrinsic[t] = result.extrinsic_reward[e];
          if (objective != nullptr) {
            if (objective->kind == ObjectiveKind::kOurs) {
              chunk[e].reward_intrinsic[t] = intrinsic_reward(
                  per_step_matching_error<S>(delta_phi, chunk[e].skill,
                                             objective->episode_steps),
                  objective->resolved_sigma());
            } else {
              chunk[e].reward_intrinsic[t] =
                  baseline_intrinsic_reward<S>(delta_phi, chunk[e].skill);
            }
          }
        }
      }
      states = result.next_states;
      obs = next_obs;
      phi = next_phi;
    }
    for (auto& trajectory : chunk) out.push_back(std::move(trajectory));
    next += static_cast<std::size_t>(batch);
  }
  return out;
}

/// Spearman rank correlation between commanded skill magnitude and realized
/// mean episode speed, over a stratified magnitude sweep with random
/// directions. Degenerate (zero-variance) speeds are flagged with rho = 0.
template <typename S>
SpearmanResult skill_speed_correlation(const EnvConfig<S>& env_cfg,
                                       const NetParams<S>& encoder,
                                       const GaussianPolicy<S>& policy,
                                       const ObsScales<S>& scales, int num_skills,
                                       S z_max, bool deterministic, Rng& rng,
                                       std::vector<double>* magnitudes_out = nullptr,
                                       std::vector<double>* speeds_out = nullptr) {
  if (num_skills < 2) throw ConfigError("skill_speed_correlation: need >= 2 skills");
  const int skill_dim = encoder.spec().output_width();
  std::vector<VecX<S>> skills;
  skills.reserve(static_cast<std::size_t>(num_skills));
  for (int i = 0; i < num_skills; ++i) {
    const S magnitude =
        z_max * static_cast<S>(i + 0.5) / static_cast<S>(num_skills);
    VecX<S> direction =
        sample_skill<S>(skill_dim, S(1), SkillSampling::kUniformRadius, rng);
    const S norm = direction.norm();
    if (norm > S(0)) direction /= norm;
    skills.push_back(magnitude * direction);
  }
  const auto trajectories = collect_eval_trajectories(
      env_cfg, encoder, policy, scales, skills, deterministic, rng);
  std::vector<double> magnitude_values, speed_values;
  for (const auto& trajectory : trajectories) {
    magnitude_values.push_back(static_cast<double>(trajectory.skill.norm()));
    speed_values.push_back(static_cast<double>(trajectory.mean_speed));
  }
  if (magnitudes_out) *magnitudes_out = magnitude_values;
  if (speeds_out) *speeds_out = speed_values;
  return spearman(magnitude_values, speed_values);
}

/// Aggregated evaluation statistics (one run, many episodes).
struct MetricsReport {
  long trajectories = 0;
  SpeedHistogram histogram;
  double mean_speed = 0;
  double speed_q10 = 0;
  double speed_q90 = 0;
  double speed_idr = 0;  // inter-decile range of per-trajectory mean speeds
  double mean_net = 0;
  double max_net = 0;
  double mean_path = 0;
  double max_path = 0;
  double spearman_mag_speed = 0;
  bool spearman_degenerate = false;
  double mean_alignment_cosine = 0;
  long alignment_filtered = 0;
  bool alignment_degenerate = false;
  long coverage_cells = 0;
  double coverage_cell_size = 0;
  double violation_fraction = 0;  // share with ||dphi|| > d + 1e-3
};

struct EvalSettings {
  int hist_bins = 30;
  double hist_min = 0.0;
  double hist_max = 3.0;
  double coverage_cell = 0.25;
  int episode_steps = 300;               // N for alignment scaling
  DistanceMetric metric = DistanceMetric::kEuclidean;
  double constraint_tolerance = 1e-3;
};

inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  const double position = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(position));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(position));
  const double frac = position - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

template <typename S>
MetricsReport compute_metrics(const std::vector<EvalTrajectory<S>>& trajectories,
                              const EvalSettings& settings) {
  if (trajectories.empty()) throw DimensionError("compute_metrics: no trajectories");
  MetricsReport report;
  report.trajectories = static_cast<long>(trajectories.size());

  std::vector<double> speeds;
  std::vector<double> magnitudes;
  std::vector<MatX<S>> positions;
  long violations = 0;
  long transitions = 0;
  double alignment_total = 0;
  long alignment_used = 0;
  long alignment_filtered = 0;

  for (const auto& trajectory : trajectories) {
    speeds.push_back(static_cast<double>(trajectory.mean_speed));
    magnitudes.push_back(static_cast<double>(trajectory.skill.norm()));
    positions.push_back(trajectory.positions);

    const TraveledDistance<S> traveled = traveled_distance<S>(trajectory.positions);
    report.mean_net += static_cast<double>(traveled.net) / trajectories.size();
    report.max_net = std::max(report.max_net, static_cast<double>(traveled.net));
    report.mean_path += static_cast<double>(traveled.path) / trajectories.size();
    report.max_path = std::max(report.max_path, static_cast<double>(traveled.path));

    for (Index t = 0; t < trajectory.delta_phi.cols(); ++t) {
      const double dphi_norm = static_cast<double>(trajectory.delta_phi.col(t).norm());
      const double d = settings.metric == DistanceMetric::kEuclidean
                           ? static_cast<double>(trajectory.state_distance[t])
                           : 1.0;
      if (dphi_norm > d + settings.constraint_tolerance) ++violations;
      ++transitions;
    }
    const AlignmentResult alignment = alignment_score<S>(
        trajectory.delta_phi,
        MatX<S>(trajectory.skill * MatX<S>::Ones(1, trajectory.delta_phi.cols())),
        settings.episode_steps);
    alignment_total += alignment.mean_cosine * static_cast<double>(alignment.used);
    alignment_used += alignment.used;
    alignment_filtered += alignment.filtered;
  }

  report.histogram =
      speed_histogram(speeds, settings.hist_bins, settings.hist_min, settings.hist_max);
  report.mean_speed = 0;
  for (double v : speeds) report.mean_speed += v / static_cast<double>(speeds.size());
  report.speed_q10 = quantile(speeds, 0.1);
  report.speed_q90 = quantile(speeds, 0.9);
  report.speed_idr = report.speed_q90 - report.speed_q10;

  const SpearmanResult rank = spearman(magnitudes, speeds);
  report.spearman_mag_speed = rank.rho;
  report.spearman_degenerate = rank.degenerate;

  report.mean_alignment_cosine =
      alignment_used > 0 ? alignment_total / static_cast<double>(alignment_used) : 0.0;
  report.alignment_filtered = alignment_filtered;
  report.alignment_degenerate = alignment_used == 0;

  const CoverageGrid grid = coverage_grid(positions, settings.coverage_cell);
  report.coverage_cells = grid.count();
  report.coverage_cell_size = settings.coverage_cell;
  report.violation_fraction =
      transitions > 0 ? static_cast<double>(violations) / transitions : 0.0;
  return report;
}

}  // namespace skillab

#endif  // SKILLAB_METRICS_HPP_
