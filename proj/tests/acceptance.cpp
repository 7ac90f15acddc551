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

// Acceptance suite: one binary, one pass/fail line per criterion.
//
// Criteria 4-8 train real models (minutes each on one desktop core); the
// suite trains each model once and shares it. Run with
//   skillab_acceptance [--only 1,2,3] [--work DIR] [--reuse]
// --reuse loads checkpoints left in the work directory by a previous run
// (development convenience; a fresh run always retrains).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "skillab/checkpoint.hpp"
#include "skillab/config.hpp"
#include "skillab/metrics.hpp"
#include "skillab/run_io.hpp"
#include "skillab/tracker.hpp"
#include "skillab/trainer.hpp"

namespace skillab {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct CriterionResult {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared trained models. Training uses single precision for CPU budget; all
// thresholds below are far above single-precision noise.

using Scalar = float;

struct TrainedModel {
  std::unique_ptr<Trainer<Scalar>> trainer;
  std::vector<TrainLogRow> rows;
  double train_seconds = 0;
};

class ModelBank {
 public:
  ModelBank(fs::path work_dir, bool reuse)
      : work_dir_(std::move(work_dir)), reuse_(reuse) {
    fs::create_directories(work_dir_);
  }

  static ExperimentConfig point_mass_config(const std::string& objective,
                                            std::uint64_t seed) {
    ExperimentConfig cfg;  // 24 envs x 300 steps, z_max 50
    cfg.precision = "single";
    cfg.objective_kind = objective;
    cfg.seed = seed;
    cfg.updates = 1000;
    cfg.entropy_coef = 0.01;  // 0.1 diverges with clip-bounded actions
    return cfg;
  }

  static ExperimentConfig unicycle_config(int skill_dim, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.precision = "single";
    cfg.env_kind = "unicycle";
    cfg.skill_dim = skill_dim;
    cfg.seed = seed;
    cfg.updates = 1000;
    cfg.entropy_coef = 0.01;
    return cfg;
  }

  const TrainedModel& get(const std::string& name, const ExperimentConfig& cfg) {
    auto it = models_.find(name);
    if (it != models_.end()) return it->second;

    TrainedModel model;
    model.trainer = std::make_unique<Trainer<Scalar>>(cfg);
    const fs::path ckpt_path = work_dir_ / (name + ".skcp");
    const fs::path log_path = work_dir_ / (name + "_log.tsv");

    if (reuse_ && fs::exists(ckpt_path)) {
      model.trainer->restore(Checkpoint::load(ckpt_path.string()));
      model.rows = read_rows(log_path);
      std::printf("        [%s] reusing checkpoint at update %lld\n", name.c_str(),
                  static_cast<long long>(model.trainer->state().update_index));
    } else {
      std::printf("        [%s] training %d updates (%s, %s, skill_dim %d)...\n",
                  name.c_str(), cfg.updates, cfg.objective_kind.c_str(),
                  cfg.env_kind.c_str(), cfg.skill_dim);
      std::fflush(stdout);
      const auto start = Clock::now();
      while (model.trainer->state().update_index < cfg.updates) {
        model.rows.push_back(model.trainer->update());
        if (model.rows.size() % 200 == 0) {
          std::printf("        [%s] update %zu  speed %.2f  kl %.1e  lambda %.3f\n",
                      name.c_str(), model.rows.size(),
                      model.rows.back().mean_episode_speed,
                      model.rows.back().approx_kl, model.rows.back().lambda);
          std::fflush(stdout);
        }
      }
      model.train_seconds = seconds_since(start);
      model.trainer->make_checkpoint(cfg.serialize()).save(ckpt_path.string());
      write_rows(log_path, model.rows);
      std::printf("        [%s] trained in %.1f s\n", name.c_str(),
                  model.train_seconds);
      std::fflush(stdout);
    }
    return models_.emplace(name, std::move(model)).first->second;
  }

 private:
  static std::vector<TrainLogRow> read_rows(const fs::path& path) {
    std::vector<TrainLogRow> rows;
    if (!fs::exists(path)) return rows;
    std::istringstream in(read_text_file(path.string()));
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      std::istringstream fields(line);
      TrainLogRow row;
      fields >> row.update >> row.env_steps >> row.lr >> row.policy_loss >>
          row.value_loss >> row.entropy >> row.approx_kl >> row.encoder_loss >>
          row.lambda >> row.violation_fraction >> row.mean_dphi_norm >>
          row.mean_episode_speed >> row.reward_intrinsic >> row.reward_extrinsic;
      rows.push_back(row);
    }
    return rows;
  }

  static void write_rows(const fs::path& path, const std::vector<TrainLogRow>& rows) {
    TrainLogWriter writer(path.string());
    for (const TrainLogRow& row : rows) writer.append(row);
  }

  fs::path work_dir_;
  bool reuse_;
  std::map<std::string, TrainedModel> models_;
};

// ---------------------------------------------------------------------------
// Criterion 1: gradient correctness over 100 random network configurations.

CriterionResult criterion_gradients() {
  Rng rng(20260809);
  double worst = 0.0;
  int done = 0;
  while (done < 100) {
    // Encoder-, policy-, and value-shaped families.
    const int family = static_cast<int>(rng.integer(3));
    const int input = family == 0 ? 4 + static_cast<int>(rng.integer(3)) : 6;
    const int output = family == 2 ? 1 : 2 + static_cast<int>(rng.integer(2));
    NetSpec spec = oracle::random_spec(rng, input, output);

    NetParams<double> params(spec);
    init_fan_in(params, rng);
    MatX<double> input_batch(input, 3);
    for (Index i = 0; i < input_batch.size(); ++i) input_batch.data()[i] = rng.normal();
    MatX<double> projection(output, 3);
    for (Index i = 0; i < projection.size(); ++i) projection.data()[i] = rng.normal();

    ForwardCache<double> cache;
    forward(params, input_batch, cache);
    if (!oracle::kink_free(cache)) continue;  // non-differentiable point: redraw
    ++done;

    auto loss = [&](const VecX<double>& flat) {
      NetParams<double> p(spec);
      p.mutable_flat() = flat;
      return (forward(p, input_batch).cwiseProduct(projection)).sum();
    };
    const Gradients<double> grads = backward(params, cache, projection);
    const VecX<double> fd = oracle::fd_gradient(loss, params.flat());
    worst = std::max(worst, oracle::max_relative_error(grads.flat, fd));
  }
  return {worst < 1e-4, format("max rel err %.2e over 100 configs", worst)};
}

// ---------------------------------------------------------------------------
// Criterion 2: telescoping bound with the factor-T correction.

CriterionResult criterion_telescoping() {
  Rng rng(7);
  int held = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    const int steps = 300;
    const int dim = trial % 2 == 0 ? 2 : 3;
    MatX<double> dphi(dim, steps);
    for (Index i = 0; i < dphi.size(); ++i) dphi.data()[i] = 0.2 * rng.normal();
    VecX<double> skill(dim);
    for (int d = 0; d < dim; ++d) skill[d] = 30.0 * rng.normal();
    if (telescoping_bound_check(dphi, skill, steps, 1e-9).holds) ++held;
  }

  // Documented regression: two equal increments defeat the factor-free form.
  MatX<double> pair(2, 2);
  pair.col(0) << 1.0, 0.0;
  pair.col(1) << 1.0, 0.0;
  const auto counterexample = telescoping_bound_check(pair, VecX<double>(VecX<double>::Zero(2)), 2);
  const bool counter_ok = counterexample.lhs == 4.0 && counterexample.rhs == 4.0 &&
                          counterexample.holds &&
                          counterexample.lhs > counterexample.rhs / 2.0;

  return {held == trials && counter_ok,
          format("%d/%d random trajectories hold; T=2 counterexample lhs %.1f > "
                 "factor-free rhs %.1f",
                 held, trials, counterexample.lhs, counterexample.rhs / 2.0)};
}

// ---------------------------------------------------------------------------
// Criterion 3: objective unit suite, exact to 1e-12.

CriterionResult criterion_objective_units() {
  const double tol = 1e-12;
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };

  // Per-step matching error.
  VecX<double> dphi(2), skill(2);
  dphi << 0.1, 0.0;
  skill << 30.0, 0.0;
  expect(std::abs(per_step_matching_error(dphi, skill, 300) - 0.0) <= tol, "e=0");
  expect(std::abs(per_step_matching_error(VecX<double>(VecX<double>::Zero(2)), skill, 300) -
                  900.0) <= tol,
         "e=900");
  skill << 0.0, 30.0;
  expect(std::abs(per_step_matching_error(dphi, skill, 300) - 1800.0) <= tol, "e=1800");

  // Intrinsic reward.
  expect(std::abs(intrinsic_reward(0.0, 1.0) - 1.0) <= tol, "r(0)=1");
  expect(std::abs(intrinsic_reward(1.0, 1.0) - 0.5) <= tol, "r(1)=0.5 at sigma 1");
  double prev = 2.0;
  bool monotone = true;
  for (double e = 0.0; e <= 64.0; e += 0.5) {
    const double r = intrinsic_reward(e, 0.25);
    monotone = monotone && r < prev;
    prev = r;
  }
  expect(monotone, "strict monotone decrease");

  // Alignment loss bilinearity.
  MatX<double> d(2, 1), z(2, 1);
  d.col(0) << 0.1, 0.0;
  z.col(0) << 0.0, 1.0;
  expect(std::abs(alignment_loss(d, z)) <= tol, "orthogonal -> 0");
  z.col(0) << 1.0, 0.0;
  expect(std::abs(alignment_loss(d, z) + 0.1) <= tol, "dot -0.1");
  expect(std::abs(alignment_loss(MatX<double>(2.0 * d), z) + 0.2) <= tol,
         "doubling doubles");
  expect(std::abs(alignment_loss(d, MatX<double>(3.0 * z)) + 0.3) <= tol,
         "bilinearity in z");

  // Smooth-L1 piecewise values at beta = 5.
  VecX<double> r1(1);
  r1 << 5.0;
  expect(std::abs(smooth_l1(r1, 5.0) - 2.5) <= tol, "smooth_l1(5)=2.5");
  r1 << 10.0;
  expect(std::abs(smooth_l1(r1, 5.0) - 7.5) <= tol, "smooth_l1(10)=7.5");
  expect(smooth_l1(VecX<double>(VecX<double>::Zero(3)), 5.0) == 0.0, "smooth_l1(0)=0");

  // Dual update arithmetic with the Table values.
  DualState<double> dual;  // 30, 1e-4, 1e-6
  dual_ascent(dual, 0.5);
  expect(std::abs(dual.lambda - 30.00005) <= tol, "lambda' = 30.00005");
  DualState<double> zero;
  zero.lambda = 0.0;
  dual_ascent(zero, 0.0);
  expect(zero.lambda == 0.0, "projection at 0");

  std::string detail = "13 exact checks at 1e-12";
  if (!failures.empty()) {
    detail = "failed: ";
    for (const auto& f : failures) detail += f + "; ";
  }
  return {failures.empty(), detail};
}

// ---------------------------------------------------------------------------
// Criterion 4: magnitude control (ours) vs. transition maximization (LSD).

struct SweepStats {
  double rho = 0;
  bool degenerate = false;
  double idr = 0;
  std::vector<double> magnitudes, speeds;
};

SweepStats magnitude_sweep(const TrainedModel& model, int num_skills,
                           std::uint64_t seed) {
  Rng rng(seed);
  SweepStats stats;
  const Trainer<Scalar>& trainer = *model.trainer;
  const SpearmanResult rank = skill_speed_correlation(
      trainer.env_config(), trainer.state().encoder, trainer.state().policy,
      trainer.scales(), num_skills, static_cast<Scalar>(50.0), true, rng,
      &stats.magnitudes, &stats.speeds);
  stats.rho = rank.rho;
  stats.degenerate = rank.degenerate;
  stats.idr = quantile(stats.speeds, 0.9) - quantile(stats.speeds, 0.1);
  return stats;
}

CriterionResult criterion_magnitude_control(ModelBank& bank) {
  const TrainedModel& ours =
      bank.get("ours_pm", ModelBank::point_mass_config("ours", 11));
  const TrainedModel& lsd = bank.get("lsd_pm", ModelBank::point_mass_config("lsd", 11));

  const bool time_ok =
      (ours.train_seconds == 0 || ours.train_seconds < 1800.0) &&
      (lsd.train_seconds == 0 || lsd.train_seconds < 1800.0);

  const SweepStats ours_stats = magnitude_sweep(ours, 200, 401);
  const SweepStats lsd_stats = magnitude_sweep(lsd, 200, 401);

  const bool pass = time_ok && !ours_stats.degenerate && ours_stats.rho >= 0.8 &&
                    lsd_stats.rho <= 0.3 && lsd_stats.idr <= 0.5 * ours_stats.idr;
  return {pass,
          format("ours rho %.3f idr %.2f m/s | lsd rho %.3f idr %.2f m/s | "
                 "train %.0f/%.0f s",
                 ours_stats.rho, ours_stats.idr, lsd_stats.rho, lsd_stats.idr,
                 ours.train_seconds, lsd.train_seconds)};
}

// ---------------------------------------------------------------------------
// Criterion 5: directional alignment of N * dphi with z on large skills.

CriterionResult criterion_alignment(ModelBank& bank) {
  const TrainedModel& ours =
      bank.get("ours_pm", ModelBank::point_mass_config("ours", 11));
  const Trainer<Scalar>& trainer = *ours.trainer;

  Rng rng(502);
  std::vector<VecX<Scalar>> skills;
  while (skills.size() < 80) {
    VecX<Scalar> z = sample_skill<Scalar>(2, Scalar(50), SkillSampling::kUniformBall, rng);
    if (z.norm() >= Scalar(10)) skills.push_back(z);  // |z| >= 0.2 z_max
  }
  const auto trajectories = collect_eval_trajectories(
      trainer.env_config(), trainer.state().encoder, trainer.state().policy,
      trainer.scales(), skills, true, rng);

  double total = 0;
  long used = 0;
  for (const auto& trajectory : trajectories) {
    const AlignmentResult a = alignment_score<Scalar>(
        trajectory.delta_phi,
        MatX<Scalar>(trajectory.skill *
                     MatX<Scalar>::Ones(1, trajectory.delta_phi.cols())),
        300);
    total += a.mean_cosine * static_cast<double>(a.used);
    used += a.used;
  }
  const double mean_cosine = used > 0 ? total / static_cast<double>(used) : -1.0;
  return {used >= 10000 && mean_cosine >= 0.9,
          format("mean cos %.4f over %ld transitions with |z| >= 10", mean_cosine,
                 used)};
}

// ---------------------------------------------------------------------------
// Criterion 6: constraint satisfaction and bounded multiplier.

CriterionResult criterion_constraint(ModelBank& bank) {
  const TrainedModel& ours =
      bank.get("ours_pm", ModelBank::point_mass_config("ours", 11));
  const Trainer<Scalar>& trainer = *ours.trainer;

  Rng rng(601);
  std::vector<VecX<Scalar>> skills;
  for (int i = 0; i < 50; ++i) {
    skills.push_back(sample_skill<Scalar>(2, Scalar(50), SkillSampling::kUniformBall, rng));
  }
  const auto trajectories = collect_eval_trajectories(
      trainer.env_config(), trainer.state().encoder, trainer.state().policy,
      trainer.scales(), skills, true, rng);

  long satisfied = 0, transitions = 0;
  for (const auto& trajectory : trajectories) {
    for (Index t = 0; t < trajectory.delta_phi.cols(); ++t) {
      const double dphi_norm = trajectory.delta_phi.col(t).norm();
      if (dphi_norm <= static_cast<double>(trajectory.state_distance[t]) + 1e-3) {
        ++satisfied;
      }
      ++transitions;
    }
  }
  const double satisfied_fraction =
      static_cast<double>(satisfied) / static_cast<double>(transitions);

  double lambda_max = 0;
  bool lambda_finite = true;
  for (const TrainLogRow& row : ours.rows) {
    lambda_max = std::max(lambda_max, row.lambda);
    lambda_finite = lambda_finite && std::isfinite(row.lambda);
  }
  const bool lambda_ok =
      lambda_finite && (ours.rows.empty() || lambda_max < 10.0 * 30.0);

  return {satisfied_fraction >= 0.95 && lambda_ok,
          format("constraint satisfied on %.2f%% of %ld transitions; lambda max "
                 "%.4f (< 300)",
                 100.0 * satisfied_fraction, transitions, lambda_max)};
}

// ---------------------------------------------------------------------------
// Criterion 7: zero-shot goal tracking, closed vs. open loop.

CriterionResult criterion_tracking(ModelBank& bank) {
  const TrainedModel& ours =
      bank.get("ours_pm", ModelBank::point_mass_config("ours", 11));
  const Trainer<Scalar>& trainer = *ours.trainer;
  const auto start = Clock::now();

  Rng goal_rng(701);
  int reached = 0;
  double closed_final_sum = 0, open_final_sum = 0;
  const int num_goals = 50;
  for (int g = 0; g < num_goals; ++g) {
    const double angle = goal_rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    const double distance = goal_rng.uniform(1.0, 5.0);
    GoalSpec<Scalar> goal;
    goal.position << static_cast<Scalar>(distance * std::cos(angle)),
        static_cast<Scalar>(distance * std::sin(angle));
    goal.tolerance = Scalar(0.5);
    goal.max_steps = 600;
    goal.hold_steps = 25;

    TrackingOptions<Scalar> closed;
    Rng rng_closed(9000 + static_cast<std::uint64_t>(g));
    const TrackingResult<Scalar> closed_result =
        track_goal(trainer.state().policy, trainer.state().encoder,
                   trainer.env_config(), trainer.scales(), Scalar(50), goal, closed,
                   rng_closed);
    reached += closed_result.reached ? 1 : 0;
    closed_final_sum += static_cast<double>(closed_result.final_distance);

    // Open loop runs the full horizon: the frozen skill keeps commanding
    // motion, so the crossing diagnostic is measured at the end.
    GoalSpec<Scalar> open_goal = goal;
    open_goal.hold_steps = open_goal.max_steps + 1;
    TrackingOptions<Scalar> open;
    open.closed_loop = false;
    Rng rng_open(9000 + static_cast<std::uint64_t>(g));
    const TrackingResult<Scalar> open_result =
        track_goal(trainer.state().policy, trainer.state().encoder,
                   trainer.env_config(), trainer.scales(), Scalar(50), open_goal,
                   open, rng_open);
    open_final_sum += static_cast<double>(open_result.final_distance);
  }

  const double reach_rate = static_cast<double>(reached) / num_goals;
  const double closed_mean = closed_final_sum / num_goals;
  const double open_mean = open_final_sum / num_goals;
  const double elapsed = seconds_since(start);
  const bool pass = reach_rate >= 0.8 && open_mean >= 2.0 * closed_mean &&
                    elapsed < 300.0;
  return {pass,
          format("closed: %d/%d reached (mean final %.2f m) | open mean final "
                 "%.2f m (%.1fx) | %.0f s",
                 reached, num_goals, closed_mean, open_mean,
                 open_mean / std::max(1e-9, closed_mean), elapsed)};
}

// ---------------------------------------------------------------------------
// Criterion 8: 3-D latent pose tracking vs. the 2-D model.

CriterionResult criterion_pose_tracking(ModelBank& bank) {
  const TrainedModel& uni3 = bank.get("ours_uni3", ModelBank::unicycle_config(3, 12));
  const TrainedModel& uni2 = bank.get("ours_uni2", ModelBank::unicycle_config(2, 13));

  Rng goal_rng(801);
  const int num_goals = 80;
  int joint_3d = 0, heading_2d = 0;
  for (int g = 0; g < num_goals; ++g) {
    const double angle = goal_rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    const double distance = goal_rng.uniform(1.0, 4.0);
    const double heading = goal_rng.uniform(-3.14159265358979323846,
                                            3.14159265358979323846);
    GoalSpec<Scalar> goal;
    goal.position << static_cast<Scalar>(distance * std::cos(angle)),
        static_cast<Scalar>(distance * std::sin(angle));
    goal.heading = static_cast<Scalar>(heading);
    goal.tolerance = Scalar(0.75);
    goal.heading_tolerance = Scalar(0.4);
    goal.max_steps = 900;
    goal.hold_steps = 25;
    TrackingOptions<Scalar> options;

    // 3-D model: joint position + heading success.
    Rng rng3(9500 + static_cast<std::uint64_t>(g));
    const TrackingResult<Scalar> r3 = track_heading_goal(
        uni3.trainer->state().policy, uni3.trainer->state().encoder,
        uni3.trainer->env_config(), uni3.trainer->scales(), Scalar(50), goal,
        options, rng3);
    joint_3d += r3.reached ? 1 : 0;

    // 2-D model: position-only commands on the same goals at the same
    // position tolerance; the heading component is measured, not commanded.
    Rng rng2(9500 + static_cast<std::uint64_t>(g));
    GoalSpec<Scalar> pos_goal = goal;
    pos_goal.tolerance = Scalar(0.75);
    const TrackingResult<Scalar> r2 = track_goal(
        uni2.trainer->state().policy, uni2.trainer->state().encoder,
        uni2.trainer->env_config(), uni2.trainer->scales(), Scalar(50), pos_goal,
        options, rng2);
    const Scalar final_heading = r2.trajectory(2, r2.trajectory.cols() - 1);
    const double heading_error =
        std::abs(static_cast<double>(wrap_angle(final_heading - *goal.heading)));
    heading_2d += heading_error <= 0.4 ? 1 : 0;
  }

  const double joint_rate_3d = static_cast<double>(joint_3d) / num_goals;
  const double heading_rate_2d = static_cast<double>(heading_2d) / num_goals;
  return {joint_rate_3d >= 0.5 && heading_rate_2d <= 0.2,
          format("3-D joint success %.0f%% (>= 50%%) | 2-D heading success %.0f%% "
                 "(<= 20%%) over %d pose goals",
                 100.0 * joint_rate_3d, 100.0 * heading_rate_2d, num_goals)};
}

// ---------------------------------------------------------------------------
// Criterion 9: PPO sanity oracle on a dense-reward reach task.

CriterionResult criterion_ppo_reach() {
  // Plain PPO on -||p - goal||, no skills, no encoder in the loop.
  EnvConfig<Scalar> env_cfg;
  env_cfg.kind = EnvKind::kPointMass;
  env_cfg.num_envs = 8;
  env_cfg.episode_steps = 150;
  env_cfg.w_action_rate = Scalar(0);
  env_cfg.w_energy = Scalar(0);
  env_cfg.w_speed = Scalar(0);
  const Vec2<Scalar> goal(Scalar(2), Scalar(1));

  Rng rng(901);
  ObsScales<Scalar> scales;
  GaussianPolicy<Scalar> policy(
      NetSpec{{4, 64, 64, 2}, Activation::kElu, OutputActivation::kIdentity},
      Scalar(0));
  init_policy(policy, rng, 0.01);
  NetParams<Scalar> value_net(
      NetSpec{{4, 64, 64, 1}, Activation::kElu, OutputActivation::kIdentity});
  init_fan_in(value_net, rng);
  AdamConfig adam;
  adam.learning_rate = 1e-3;
  AdamState<Scalar> policy_opt(policy.mean_net.size(), adam);
  AdamState<Scalar> log_std_opt(policy.log_std.size(), adam);
  AdamState<Scalar> value_opt(value_net.size(), adam);

  PPOConfig<Scalar> ppo;
  ppo.entropy_coef = Scalar(0.01);
  Scalar lr = Scalar(1e-3);

  VecEnv<Scalar> env(env_cfg);
  const int horizon = env_cfg.episode_steps;
  const Index m = static_cast<Index>(env_cfg.num_envs) * horizon;

  int updates_used = 0;
  for (int update = 0; update < 300; ++update) {
    env.reset(rng);
    RolloutBatch<Scalar> batch;
    batch.num_envs = env_cfg.num_envs;
    batch.horizon = horizon;
    batch.policy_obs.resize(4, m);
    batch.actions.resize(2, m);
    batch.action_means.resize(2, m);
    batch.old_log_std = policy.log_std;
    batch.log_probs.resize(m);
    batch.values.resize(m);
    batch.next_values = VecX<Scalar>::Zero(m);
    batch.rewards.resize(m);
    batch.terminated = BoolArray::Constant(m, false);
    batch.truncated = BoolArray::Constant(m, false);

    MatX<Scalar> states = env.states();
    for (int t = 0; t < horizon; ++t) {
      const MatX<Scalar> obs = policy_input(env_cfg, scales,
                                            observations(env_cfg, states),
                                            MatX<Scalar>(0, env_cfg.num_envs));
      const MatX<Scalar> means = forward(policy.mean_net, obs);
      const MatX<Scalar> actions = sample_actions<Scalar>(means, policy.log_std, rng);
      const VecX<Scalar> log_probs =
          gaussian_log_prob<Scalar>(means, policy.log_std, actions);
      const VecX<Scalar> values = forward(value_net, obs).transpose();
      const StepResult<Scalar> result = env.step(actions);
      for (int e = 0; e < env_cfg.num_envs; ++e) {
        const Index idx = batch.flat_index(e, t);
        batch.policy_obs.col(idx) = obs.col(e);
        batch.actions.col(idx) = actions.col(e);
        batch.action_means.col(idx) = means.col(e);
        batch.log_probs[idx] = log_probs[e];
        batch.values[idx] = values[e];
        batch.rewards[idx] =
            -(result.next_states.col(e).template head<2>() - goal).norm();
        batch.truncated[idx] = result.truncated[e];
      }
      if (t == horizon - 1) {
        const MatX<Scalar> next_obs = policy_input(
            env_cfg, scales, observations(env_cfg, result.next_states),
            MatX<Scalar>(0, env_cfg.num_envs));
        const MatX<Scalar> boot = forward(value_net, next_obs);
        for (int e = 0; e < env_cfg.num_envs; ++e) {
          batch.next_values[batch.flat_index(e, t)] = boot(0, e);
        }
      }
      states = result.next_states;
    }
    for (int e = 0; e < env_cfg.num_envs; ++e) {
      for (int t = 0; t + 1 < horizon; ++t) {
        const Index idx = batch.flat_index(e, t);
        batch.next_values[idx] = batch.values[idx + 1];
      }
    }

    VecX<Scalar> advantages, returns;
    compute_gae(batch, ppo.gamma, ppo.gae_lambda, &advantages, &returns);
    const UpdateStats<Scalar> stats =
        ppo_update(policy, policy_opt, log_std_opt, value_net, value_opt, batch,
                   advantages, returns, ppo, rng);
    if (stats.numeric_fault) return {false, "numeric fault during reach training"};
    lr = adaptive_lr(stats.approx_kl, ppo.kl_target, lr, ppo.lr_min, ppo.lr_max);
    policy_opt.config.learning_rate = static_cast<double>(lr);
    log_std_opt.config.learning_rate = static_cast<double>(lr);
    value_opt.config.learning_rate = static_cast<double>(lr);
    updates_used = update + 1;

    // Early exit sweep once the policy looks converged.
    if (update >= 60 && update % 20 == 0) {
      int ok = 0;
      VecEnv<Scalar> probe(env_cfg);
      Rng probe_rng(902);
      probe.reset(probe_rng);
      MatX<Scalar> probe_states = probe.states();
      for (int t = 0; t < horizon; ++t) {
        const MatX<Scalar> obs = policy_input(env_cfg, scales,
                                              observations(env_cfg, probe_states),
                                              MatX<Scalar>(0, env_cfg.num_envs));
        probe_states = probe.step(forward(policy.mean_net, obs)).next_states;
      }
      for (int e = 0; e < env_cfg.num_envs; ++e) {
        ok += (probe_states.col(e).template head<2>() - goal).norm() < Scalar(0.5);
      }
      if (ok == env_cfg.num_envs) break;
    }
  }

  // Final evaluation: 48 deterministic episodes.
  int successes = 0;
  const int eval_envs = 48;
  EnvConfig<Scalar> eval_cfg = env_cfg;
  eval_cfg.num_envs = eval_envs;
  VecEnv<Scalar> eval_env(eval_cfg);
  Rng eval_rng(903);
  eval_env.reset(eval_rng);
  MatX<Scalar> states = eval_env.states();
  for (int t = 0; t < horizon; ++t) {
    const MatX<Scalar> obs = policy_input(eval_cfg, scales,
                                          observations(eval_cfg, states),
                                          MatX<Scalar>(0, eval_envs));
    states = eval_env.step(forward(policy.mean_net, obs)).next_states;
  }
  for (int e = 0; e < eval_envs; ++e) {
    successes += (states.col(e).template head<2>() - goal).norm() < Scalar(0.5);
  }
  const double rate = static_cast<double>(successes) / eval_envs;
  return {rate >= 0.9, format("reach success %.0f%% after %d updates", 100.0 * rate,
                              updates_used)};
}

// ---------------------------------------------------------------------------
// Criterion 10: determinism, checkpoint round trip, resume equivalence.

ExperimentConfig determinism_config() {
  ExperimentConfig cfg;
  cfg.seed = 33;
  cfg.num_envs = 4;
  cfg.episode_steps = 30;
  cfg.epochs = 3;
  cfg.minibatches = 2;
  cfg.encoder_hidden = {8, 8};
  cfg.policy_hidden = {8, 8};
  cfg.value_hidden = {8, 8};
  cfg.updates = 4;
  return cfg;
}

CriterionResult criterion_determinism(const fs::path& work) {
  const ExperimentConfig cfg = determinism_config();
  const fs::path dir = work / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);

  auto run_log = [&](const std::string& name, bool interrupt) {
    const fs::path path = dir / name;
    Trainer<double> trainer(cfg);
    TrainLogWriter log(path.string());
    if (!interrupt) {
      for (int u = 0; u < cfg.updates; ++u) log.append(trainer.update());
      return path;
    }
    // First half, checkpoint, then a fresh process-equivalent resume.
    for (int u = 0; u < 2; ++u) log.append(trainer.update());
    const fs::path ckpt = dir / "resume.skcp";
    trainer.make_checkpoint(cfg.serialize()).save(ckpt.string());

    Trainer<double> resumed(cfg);
    resumed.restore(Checkpoint::load(ckpt.string()));
    TrainLogWriter::resume_truncate(path.string(),
                                    resumed.state().update_index);
    TrainLogWriter resumed_log(path.string());
    while (resumed.state().update_index < cfg.updates) {
      resumed_log.append(resumed.update());
    }
    return path;
  };

  const fs::path log_a = run_log("run_a.tsv", false);
  const fs::path log_b = run_log("run_b.tsv", false);
  const fs::path log_resumed = run_log("run_resumed.tsv", true);
  const bool identical = read_text_file(log_a.string()) == read_text_file(log_b.string());
  const bool resume_equal =
      read_text_file(log_a.string()) == read_text_file(log_resumed.string());

  // Checkpoint byte-exact round trip.
  Trainer<double> trainer(cfg);
  trainer.update();
  const fs::path ck_a = dir / "a.skcp";
  const fs::path ck_b = dir / "b.skcp";
  trainer.make_checkpoint(cfg.serialize()).save(ck_a.string());
  Checkpoint::load(ck_a.string()).save(ck_b.string());
  const bool roundtrip = read_text_file(ck_a.string()) == read_text_file(ck_b.string());

  return {identical && resume_equal && roundtrip,
          format("logs identical %s | resume-equivalent %s | checkpoint "
                 "round-trip %s",
                 identical ? "yes" : "NO", resume_equal ? "yes" : "NO",
                 roundtrip ? "yes" : "NO")};
}

// ---------------------------------------------------------------------------

int run_acceptance(int argc, char** argv) {
  fs::path work = "acceptance_work";
  bool reuse = false;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--work" && i + 1 < argc) {
      work = argv[++i];
    } else if (arg == "--reuse") {
      reuse = true;
    } else if (arg == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string item;
      while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
    } else {
      std::fprintf(stderr, "usage: %s [--only 1,2,...] [--work DIR] [--reuse]\n",
                   argv[0]);
      return 2;
    }
  }

  ModelBank bank(work, reuse);
  struct Criterion {
    int id;
    const char* name;
    std::function<CriterionResult()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient-correctness", [&] { return criterion_gradients(); }},
      {2, "telescoping-bound", [&] { return criterion_telescoping(); }},
      {3, "objective-unit-suite", [&] { return criterion_objective_units(); }},
      {4, "magnitude-control", [&] { return criterion_magnitude_control(bank); }},
      {5, "directional-alignment", [&] { return criterion_alignment(bank); }},
      {6, "constraint-satisfaction", [&] { return criterion_constraint(bank); }},
      {7, "zero-shot-tracking", [&] { return criterion_tracking(bank); }},
      {8, "pose-tracking-3d", [&] { return criterion_pose_tracking(bank); }},
      {9, "ppo-reach-oracle", [&] { return criterion_ppo_reach(); }},
      {10, "determinism-persistence", [&] { return criterion_determinism(work); }},
  };

  int failures = 0;
  int ran = 0;
  for (const Criterion& criterion : criteria) {
    if (!only.empty() && only.count(criterion.id) == 0) continue;
    ++ran;
    const auto start = Clock::now();
    CriterionResult result;
    try {
      result = criterion.run();
    } catch (const std::exception& e) {
      result = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = seconds_since(start);
    std::printf("[%2d/10] %-26s %s  (%.1f s)  %s\n", criterion.id, criterion.name,
                result.pass ? "PASS" : "FAIL", elapsed, result.detail.c_str());
    std::fflush(stdout);
    failures += result.pass ? 0 : 1;
  }
  std::printf("%d/%d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace skillab

int main(int argc, char** argv) { return skillab::run_acceptance(argc, argv); }
