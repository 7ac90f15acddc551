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

#ifndef SKILLAB_ADAM_HPP_
#define SKILLAB_ADAM_HPP_

#include <cmath>
#include <cstdint>

#include "skillab/mlp.hpp"
#include "skillab/types.hpp"

namespace skillab {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment estimates for one flat parameter vector.
template <typename S>
struct AdamState {
  VecX<S> first_moment;
  VecX<S> second_moment;
  std::int64_t step_count = 0;
  AdamConfig config;

  AdamState() = default;
  explicit AdamState(Index num_params, AdamConfig cfg = {})
      : first_moment(VecX<S>::Zero(num_params)),
        second_moment(VecX<S>::Zero(num_params)),
        config(cfg) {}
};

enum class StepStatus { kOk, kNonFiniteGradient };

/// One bias-corrected Adam update on a flat parameter vector. A non-finite
/// gradient leaves parameters, moments, and step count untouched.
template <typename S>
StepStatus adam_step(VecX<S>& params, const VecX<NoDeduce<S>>& grads, AdamState<S>& state) {
  if (grads.size() != params.size() || state.first_moment.size() != params.size()) {
    throw DimensionError("adam_step: gradient/state size mismatch");
  }
  if (!grads.allFinite()) return StepStatus::kNonFiniteGradient;

  const AdamConfig& c = state.config;
  state.step_count += 1;
  const S b1 = static_cast<S>(c.beta1);
  const S b2 = static_cast<S>(c.beta2);
  state.first_moment = b1 * state.first_moment + (S(1) - b1) * grads;
  state.second_moment =
      b2 * state.second_moment + (S(1) - b2) * grads.cwiseProduct(grads);

  const double t = static_cast<double>(state.step_count);
  const S corr1 = static_cast<S>(1.0 - std::pow(c.beta1, t));
  const S corr2 = static_cast<S>(1.0 - std::pow(c.beta2, t));
  const S lr = static_cast<S>(c.learning_rate);
  const S eps = static_cast<S>(c.epsilon);

  params.array() -= lr * (state.first_moment.array() / corr1) /
                    ((state.second_moment.array() / corr2).sqrt() + eps);
  return StepStatus::kOk;
}

template <typename S>
StepStatus adam_step(NetParams<S>& params, const VecX<NoDeduce<S>>& grads, AdamState<S>& state) {
  if (!grads.allFinite()) return StepStatus::kNonFiniteGradient;
  return adam_step(params.mutable_flat(), grads, state);
}

}  // namespace skillab

#endif  // SKILLAB_ADAM_HPP_
