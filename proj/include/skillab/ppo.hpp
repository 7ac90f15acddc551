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

#ifndef SKILLAB_PPO_HPP_
#define SKILLAB_PPO_HPP_

#include <algorithm>
#include <functional>
#include <vector>

#include "skillab/adam.hpp"
#include "skillab/policy.hpp"
#include "skillab/rollout.hpp"
#include "skillab/rng.hpp"
#include "skillab/types.hpp"

namespace skillab {

template <typename S>
struct PPOConfig {
  S clip_ratio = S(0.2);
  S value_clip_ratio = S(0.2);
  S entropy_coef = S(0.1);
  S value_coef = S(1.0);
  S gamma = S(0.99);
  S gae_lambda = S(0.95);
  int epochs = 15;
  int minibatches = 4;
  S kl_target = S(8e-3);
  S lr_min = S(1e-5);
  S lr_max = S(1e-2);
  bool normalize_advantages = true;
  // With env-side action clipping the reward loses all sensitivity to the
  // exploration scale once it exceeds the clip range, so the entropy bonus
  // alone would grow log_std without bound (and eventually overflow the
  // exp() in the density). The clamp keeps the policy in a recoverable
  // regime either way.
  S log_std_min = S(-4);
  S log_std_max = S(0.5);
};

template <typename S>
struct UpdateStats {
  S policy_loss = 0;
  S value_loss = 0;
  S entropy = 0;
  S approx_kl = 0;   // mean closed-form Gaussian KL over all minibatches
  bool numeric_fault = false;
};

/// Called after each PPO minibatch step with the minibatch column indices;
/// the trainer hooks the encoder update here so both learners sweep the same
/// minibatch stream.
using MinibatchHook = std::function<void(const std::vector<int>&)>;

/// KL-adaptive learning rate (multiplicative 1.5 up/down around the target,
/// clamped to [lr_min, lr_max]).
template <typename S>
S adaptive_lr(S approx_kl, S kl_target, S lr, S lr_min, S lr_max) {
  if (approx_kl > S(2) * kl_target) {
    lr = std::max(lr / S(1.5), lr_min);
  } else if (approx_kl < kl_target / S(2)) {
    lr = std::min(lr * S(1.5), lr_max);
  }
  return lr;
}

/// Clipped-surrogate PPO update over epochs x minibatches with deterministic
/// shuffling. A non-finite loss or gradient aborts the whole update and
/// restores the pre-update parameters and optimizer states.
template <typename S>
UpdateStats<S> ppo_update(GaussianPolicy<S>& policy, AdamState<S>& policy_opt,
                          AdamState<S>& log_std_opt, NetParams<S>& value_net,
                          AdamState<S>& value_opt, const RolloutBatch<S>& batch,
                          VecX<S> advantages, const VecX<S>& returns,
                          const PPOConfig<S>& cfg, Rng& rng,
                          const MinibatchHook& hook = {}) {
  const Index m = batch.size();
  if (m == 0) throw DimensionError("ppo_update: empty batch");

  // Snapshot for fault recovery.
  const VecX<S> policy_before = policy.mean_net.flat();
  const VecX<S> log_std_before = policy.log_std;
  const VecX<S> value_before = value_net.flat();
  const AdamState<S> policy_opt_before = policy_opt;
  const AdamState<S> log_std_opt_before = log_std_opt;
  const AdamState<S> value_opt_before = value_opt;

  if (cfg.normalize_advantages) {
    const S mean = advantages.mean();
    const S stddev =
        std::sqrt((advantages.array() - mean).square().sum() /
                  static_cast<S>(std::max<Index>(1, m - 1)));
    advantages = (advantages.array() - mean) / (stddev + S(1e-8));
  }

  std::vector<int> order(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = static_cast<int>(i);

  UpdateStats<S> stats;
  int steps = 0;
  const int action_dim = policy.action_dim();

  auto abort = [&]() {
    policy.mean_net.mutable_flat() = policy_before;
    policy.log_std = log_std_before;
    value_net.mutable_flat() = value_before;
    policy_opt = policy_opt_before;
    log_std_opt = log_std_opt_before;
    value_opt = value_opt_before;
    stats.numeric_fault = true;
    return stats;
  };

  ForwardCache<S> policy_cache, value_cache;  // reused across minibatches
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    Index cursor = 0;
    const Index base = m / cfg.minibatches;
    const Index remainder = m % cfg.minibatches;
    for (int mb = 0; mb < cfg.minibatches; ++mb) {
      const Index count = base + (mb < remainder ? 1 : 0);
      if (count == 0) continue;
      const std::vector<int> idx(order.begin() + cursor, order.begin() + cursor + count);
      cursor += count;

      const MatX<S> obs = batch.policy_obs(Eigen::all, idx);
      const MatX<S> act = batch.actions(Eigen::all, idx);
      const MatX<S> old_means = batch.action_means(Eigen::all, idx);
      const VecX<S> old_log_probs = batch.log_probs(idx);
      const VecX<S> old_values = batch.values(idx);
      const VecX<S> adv = advantages(idx);
      const VecX<S> ret = returns(idx);
      const S inv_count = S(1) / static_cast<S>(count);

      // Policy pass.
      const MatX<S> means = forward(policy.mean_net, obs, policy_cache);
      const VecX<S> log_probs = gaussian_log_prob<S>(means, policy.log_std, act);
      stats.approx_kl +=
          gaussian_kl<S>(old_means, batch.old_log_std, means, policy.log_std);

      const VecX<S> inv_var = (-S(2) * policy.log_std).array().exp();
      const MatX<S> diff = act - means;
      const ArrX<S> ratio = (log_probs - old_log_probs).array().exp();
      const ArrX<S> adv_arr = adv.array();
      const ArrX<S> clipped_ratio =
          ratio.min(S(1) + cfg.clip_ratio).max(S(1) - cfg.clip_ratio);
      const S pg_loss = -(ratio * adv_arr).min(clipped_ratio * adv_arr).mean();
      // Gradient flows only through the active (unclipped) branch.
      const ArrX<S> weight =
          ((adv_arr > S(0) && ratio < S(1) + cfg.clip_ratio) ||
           (adv_arr < S(0) && ratio > S(1) - cfg.clip_ratio))
              .select(-adv_arr * ratio * inv_count, ArrX<S>::Zero(count));
      // d logp / d mean = diff / var; d logp / d log_std = diff^2/var - 1.
      const MatX<S> mean_grad =
          ((diff.array().colwise() * inv_var.array()).rowwise() *
           weight.transpose())
              .matrix();
      VecX<S> log_std_grad =
          (diff.cwiseProduct(diff) * weight.matrix()).cwiseProduct(inv_var);
      log_std_grad.array() -= weight.sum() + cfg.entropy_coef;

      // Value pass with clipped loss.
      const MatX<S> value_out = forward(value_net, obs, value_cache);
      const ArrX<S> value = value_out.row(0).transpose().array();
      const ArrX<S> value_old = old_values.array();
      const ArrX<S> value_clipped =
          value_old +
          (value - value_old).min(cfg.value_clip_ratio).max(-cfg.value_clip_ratio);
      const ArrX<S> err = value - ret.array();
      const ArrX<S> err_clipped = value_clipped - ret.array();
      const ArrX<S> sq = err * err;
      const ArrX<S> sq_clipped = err_clipped * err_clipped;
      const auto use_unclipped = sq >= sq_clipped;
      const S v_loss = use_unclipped.select(sq, sq_clipped).mean();
      MatX<S> value_grad(1, count);
      value_grad.row(0) =
          (use_unclipped.select(
               S(2) * err,
               ((value - value_old).abs() < cfg.value_clip_ratio)
                   .select(S(2) * err_clipped, ArrX<S>::Zero(count))) *
           inv_count)
              .transpose();

      const S entropy = gaussian_entropy(policy.log_std);
      const S loss = pg_loss + cfg.value_coef * v_loss - cfg.entropy_coef * entropy;
      if (!std::isfinite(static_cast<double>(loss))) return abort();

      stats.policy_loss += pg_loss;
      stats.value_loss += v_loss;
      stats.entropy += entropy;
      ++steps;

      const Gradients<S> policy_grads = backward(policy.mean_net, policy_cache, mean_grad);
      const Gradients<S> value_grads =
          backward(value_net, value_cache, MatX<S>(cfg.value_coef * value_grad));
      if (adam_step(policy.mean_net, policy_grads.flat, policy_opt) != StepStatus::kOk ||
          adam_step(policy.log_std, log_std_grad, log_std_opt) != StepStatus::kOk ||
          adam_step(value_net, value_grads.flat, value_opt) != StepStatus::kOk) {
        return abort();
      }
      policy.log_std =
          policy.log_std.cwiseMax(cfg.log_std_min).cwiseMin(cfg.log_std_max);

      if (hook) hook(idx);
    }
  }

  if (steps > 0) {
    stats.policy_loss /= static_cast<S>(steps);
    stats.value_loss /= static_cast<S>(steps);
    stats.entropy /= static_cast<S>(steps);
    stats.approx_kl /= static_cast<S>(steps);
  }
  return stats;
}

}  // namespace skillab

#endif  // SKILLAB_PPO_HPP_
