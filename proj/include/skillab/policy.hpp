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

#ifndef SKILLAB_POLICY_HPP_
#define SKILLAB_POLICY_HPP_

#include <cmath>

#include "skillab/mlp.hpp"
#include "skillab/rng.hpp"
#include "skillab/types.hpp"

namespace skillab {

inline constexpr double kLogTwoPi = 1.8378770664093454836;

/// Diagonal Gaussian policy: an MLP for the mean plus a state-independent
/// learnable log standard deviation per action dimension.
template <typename S>
struct GaussianPolicy {
  NetParams<S> mean_net;
  VecX<S> log_std;

  GaussianPolicy() = default;
  GaussianPolicy(NetSpec spec, S init_log_std)
      : mean_net(std::move(spec)),
        log_std(VecX<S>::Constant(mean_net.spec().output_width(), init_log_std)) {}

  int action_dim() const { return mean_net.spec().output_width(); }
};

template <typename S>
void init_policy(GaussianPolicy<S>& policy, Rng& rng, double final_layer_scale) {
  init_fan_in(policy.mean_net, rng, final_layer_scale);
}

/// Log density of `actions` under Gaussians with the given means (columns are
/// samples).
template <typename S>
VecX<S> gaussian_log_prob(const MatX<NoDeduce<S>>& means,
                          const VecX<S>& log_std,
                          const MatX<NoDeduce<S>>& actions) {
  const VecX<S> inv_var = (-S(2) * log_std).array().exp();
  const S constant =
      -S(0.5) * static_cast<S>(kLogTwoPi) * static_cast<S>(log_std.size()) -
      log_std.sum();
  const MatX<S> diff = actions - means;
  VecX<S> out = (-S(0.5)) * (diff.cwiseProduct(diff).transpose() * inv_var);
  out.array() += constant;
  return out;
}

/// Entropy of the (state-independent) action distribution.
template <typename S>
S gaussian_entropy(const VecX<S>& log_std) {
  return log_std.sum() + S(0.5) * static_cast<S>(log_std.size()) *
                             (S(1) + static_cast<S>(kLogTwoPi));
}

/// Samples actions column-wise: a = mean + std * n. Noise is drawn in
/// column-major element order from `rng`, which keeps rollouts deterministic.
template <typename S>
MatX<S> sample_actions(const MatX<NoDeduce<S>>& means, const VecX<S>& log_std,
                       Rng& rng) {
  const VecX<S> std_dev = log_std.array().exp();
  MatX<S> actions(means.rows(), means.cols());
  for (Index j = 0; j < means.cols(); ++j) {
    for (Index i = 0; i < means.rows(); ++i) {
      actions(i, j) = means(i, j) + std_dev[i] * static_cast<S>(rng.normal());
    }
  }
  return actions;
}

/// Exact KL(old || new) for diagonal Gaussians, averaged over columns.
/// Non-negative by construction; used for the adaptive learning rate.
template <typename S>
S gaussian_kl(const MatX<NoDeduce<S>>& old_means, const VecX<S>& old_log_std,
              const MatX<NoDeduce<S>>& new_means, const VecX<S>& new_log_std) {
  const VecX<S> var_old = (S(2) * old_log_std).array().exp();
  const VecX<S> inv_var_new = (-S(2) * new_log_std).array().exp();
  const S log_det_term = new_log_std.sum() - old_log_std.sum();
  const MatX<S> diff = new_means - old_means;
  const S quad_mean =
      S(0.5) *
      ((diff.cwiseProduct(diff).transpose() * inv_var_new).mean() +
       var_old.dot(inv_var_new));
  return log_det_term + quad_mean - S(0.5) * static_cast<S>(old_log_std.size());
}

}  // namespace skillab

#endif  // SKILLAB_POLICY_HPP_
