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

#ifndef SKILLAB_LOSSES_HPP_
#define SKILLAB_LOSSES_HPP_

#include <cmath>

#include "skillab/types.hpp"

namespace skillab {

/// Elementwise Smooth-L1 (Huber reparameterized by width beta):
/// 0.5*x^2/beta for |x| < beta, |x| - beta/2 otherwise. Continuous with
/// continuous derivative at |x| = beta.
template <typename S>
S smooth_l1_elem(S x, S beta) {
  const S a = std::abs(x);
  return a < beta ? S(0.5) * x * x / beta : a - S(0.5) * beta;
}

template <typename S>
S smooth_l1_elem_grad(S x, S beta) {
  return std::abs(x) < beta ? x / beta : (x > S(0) ? S(1) : S(-1));
}

/// Smooth-L1 of a residual vector, summed over elements.
template <typename S>
S smooth_l1(const VecX<S>& residual, S beta) {
  if (beta <= S(0)) throw ConfigError("smooth_l1: beta must be positive");
  S total = 0;
  for (Index i = 0; i < residual.size(); ++i) {
    total += smooth_l1_elem(residual[i], beta);
  }
  return total;
}

/// Batch form: residual columns are samples. Returns the mean over columns of
/// the per-column element sums.
template <typename S>
S smooth_l1_batch(const MatX<S>& residual, S beta) {
  if (beta <= S(0)) throw ConfigError("smooth_l1: beta must be positive");
  S total = 0;
  for (Index j = 0; j < residual.cols(); ++j) {
    for (Index i = 0; i < residual.rows(); ++i) {
      total += smooth_l1_elem(residual(i, j), beta);
    }
  }
  return total / static_cast<S>(residual.cols());
}

/// Gradient of smooth_l1_batch with respect to the residual matrix.
template <typename S>
MatX<S> smooth_l1_batch_grad(const MatX<S>& residual, S beta) {
  MatX<S> g(residual.rows(), residual.cols());
  const S inv_batch = S(1) / static_cast<S>(residual.cols());
  for (Index j = 0; j < residual.cols(); ++j) {
    for (Index i = 0; i < residual.rows(); ++i) {
      g(i, j) = inv_batch * smooth_l1_elem_grad(residual(i, j), beta);
    }
  }
  return g;
}

}  // namespace skillab

#endif  // SKILLAB_LOSSES_HPP_
