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

#ifndef SKILLAB_MLP_HPP_
#define SKILLAB_MLP_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "skillab/rng.hpp"
#include "skillab/types.hpp"

namespace skillab {

enum class Activation { kRelu, kElu };
enum class OutputActivation { kIdentity, kTanh };

/// Architecture of a dense feed-forward network: layer widths from input to
/// output plus the activation pair shared by all hidden layers.
struct NetSpec {
  std::vector<int> layer_widths;  // {input, hidden..., output}
  Activation hidden_activation = Activation::kRelu;
  OutputActivation output_activation = OutputActivation::kIdentity;

  int input_width() const { return layer_widths.front(); }
  int output_width() const { return layer_widths.back(); }
  int num_layers() const { return static_cast<int>(layer_widths.size()) - 1; }

  Index num_params() const {
    Index n = 0;
    for (int l = 0; l < num_layers(); ++l) {
      n += static_cast<Index>(layer_widths[l] + 1) * layer_widths[l + 1];
    }
    return n;
  }

  void validate() const {
    if (layer_widths.size() < 2) {
      throw DimensionError("NetSpec: need at least input and output widths");
    }
    for (int w : layer_widths) {
      if (w <= 0) throw DimensionError("NetSpec: widths must be positive");
    }
  }

  bool operator==(const NetSpec&) const = default;
};

/// Flat parameter store for one MLP. Per layer the layout is the column-major
/// weight matrix (out x in) followed by the bias vector. The revision counter
/// ties forward caches to the exact parameter values they were computed with.
template <typename S>
class NetParams {
 public:
  NetParams() = default;

  explicit NetParams(NetSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    Index offset = 0;
    for (int l = 0; l < spec_.num_layers(); ++l) {
      const Index in = spec_.layer_widths[l];
      const Index out = spec_.layer_widths[l + 1];
      weight_offsets_.push_back(offset);
      offset += in * out;
      bias_offsets_.push_back(offset);
      offset += out;
    }
    flat_ = VecX<S>::Zero(offset);
  }

  const NetSpec& spec() const { return spec_; }
  Index size() const { return flat_.size(); }
  std::uint64_t revision() const { return revision_; }

  const VecX<S>& flat() const { return flat_; }
  VecX<S>& mutable_flat() {
    ++revision_;
    return flat_;
  }

  Eigen::Map<const MatX<S>> weight(int layer) const {
    return {flat_.data() + weight_offsets_[layer], out_width(layer),
            in_width(layer)};
  }
  Eigen::Map<const VecX<S>> bias(int layer) const {
    return {flat_.data() + bias_offsets_[layer], out_width(layer)};
  }
  Eigen::Map<MatX<S>> mutable_weight(int layer) {
    ++revision_;
    return {flat_.data() + weight_offsets_[layer], out_width(layer),
            in_width(layer)};
  }
  Eigen::Map<VecX<S>> mutable_bias(int layer) {
    ++revision_;
    return {flat_.data() + bias_offsets_[layer], out_width(layer)};
  }

  bool all_finite() const { return flat_.allFinite(); }

 private:
  Index in_width(int layer) const { return spec_.layer_widths[layer]; }
  Index out_width(int layer) const { return spec_.layer_widths[layer + 1]; }

  NetSpec spec_;
  VecX<S> flat_;
  std::uint64_t revision_ = 0;
  std::vector<Index> weight_offsets_, bias_offsets_;
};

/// Scaled uniform fan-in initialization: W ~ U(-1/sqrt(in), 1/sqrt(in)),
/// biases zero. final_layer_scale shrinks the last layer (used for policies
/// so initial actions start near zero).
template <typename S>
void init_fan_in(NetParams<S>& params, Rng& rng, double final_layer_scale = 1.0) {
  const NetSpec& spec = params.spec();
  for (int l = 0; l < spec.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.layer_widths[l]));
    const double scale = (l == spec.num_layers() - 1) ? final_layer_scale : 1.0;
    auto w = params.mutable_weight(l);
    for (Index j = 0; j < w.cols(); ++j) {
      for (Index i = 0; i < w.rows(); ++i) {
        w(i, j) = static_cast<S>(scale * rng.uniform(-bound, bound));
      }
    }
    params.mutable_bias(l).setZero();
  }
}

/// Intermediate activations retained by a training-mode forward pass; holds
/// exactly what backward() needs to reproduce the analytic gradient.
template <typename S>
struct ForwardCache {
  NetSpec spec;
  std::uint64_t params_revision = 0;
  MatX<S> input;                    // in x batch
  std::vector<MatX<S>> pre;         // pre-activations per layer
  std::vector<MatX<S>> activation;  // post-activations per layer

  Index batch() const { return input.cols(); }
};

namespace detail {

template <typename S>
void apply_hidden(Activation act, MatX<S>& x) {
  if (act == Activation::kRelu) {
    x = x.cwiseMax(S(0));
  } else {
    // ELU, alpha = 1, in branch-free packet form:
    // max(x, 0) + exp(min(x, 0)) - 1 equals x for x >= 0 and e^x - 1 below.
    x = (x.array().max(S(0)) + x.array().min(S(0)).exp() - S(1)).matrix();
  }
}

template <typename S>
MatX<S> hidden_grad(Activation act, const MatX<S>& pre, const MatX<S>& post) {
  if (act == Activation::kRelu) {
    return (pre.array() > S(0)).template cast<S>().matrix();
  }
  // d/dx elu(x) = 1 for x >= 0, exp(x) = elu(x) + 1 otherwise; with
  // post = elu(pre) both collapse to min(post, 0) + 1.
  return (post.array().min(S(0)) + S(1)).matrix();
}

template <typename S>
void check_forward_input(const NetParams<S>& params, const MatX<S>& input) {
  if (input.rows() != params.spec().input_width()) {
    throw DimensionError("forward: input has " + std::to_string(input.rows()) +
                         " rows, spec expects " +
                         std::to_string(params.spec().input_width()));
  }
  if (input.cols() < 1) throw DimensionError("forward: empty batch");
  if (!input.allFinite()) throw NumericFault("forward: non-finite input");
}

}  // namespace detail

/// Inference-mode forward pass (no cache).
template <typename S>
MatX<S> forward(const NetParams<S>& params, const MatX<NoDeduce<S>>& input) {
  detail::check_forward_input(params, input);
  const NetSpec& spec = params.spec();
  MatX<S> x = input;
  for (int l = 0; l < spec.num_layers(); ++l) {
    MatX<S> y = (params.weight(l) * x).colwise() + params.bias(l);
    if (l + 1 < spec.num_layers()) {
      detail::apply_hidden(spec.hidden_activation, y);
    } else if (spec.output_activation == OutputActivation::kTanh) {
      y = y.array().tanh().matrix();
    }
    x = std::move(y);
  }
  return x;
}

/// Training-mode forward pass; fills `cache` for a later backward().
template <typename S>
MatX<S> forward(const NetParams<S>& params, const MatX<NoDeduce<S>>& input,
                ForwardCache<S>& cache) {
  detail::check_forward_input(params, input);
  const NetSpec& spec = params.spec();
  cache.spec = spec;
  cache.params_revision = params.revision();
  cache.input = input;
  // Keep existing storage so repeated same-shape passes do not reallocate.
  if (static_cast<int>(cache.pre.size()) != spec.num_layers()) {
    cache.pre.resize(static_cast<std::size_t>(spec.num_layers()));
    cache.activation.resize(static_cast<std::size_t>(spec.num_layers()));
  }

  const MatX<S>* x = &cache.input;
  for (int l = 0; l < spec.num_layers(); ++l) {
    cache.pre[l].noalias() = params.weight(l) * (*x);
    cache.pre[l].colwise() += params.bias(l);
    cache.activation[l] = cache.pre[l];
    if (l + 1 < spec.num_layers()) {
      detail::apply_hidden(spec.hidden_activation, cache.activation[l]);
    } else if (spec.output_activation == OutputActivation::kTanh) {
      cache.activation[l] = cache.activation[l].array().tanh().matrix();
    }
    x = &cache.activation[l];
  }
  return cache.activation.back();
}

/// Parameter and input gradients produced by backward(); `flat` matches the
/// NetParams layout exactly.
template <typename S>
struct Gradients {
  VecX<S> flat;
  MatX<S> input;
};

/// Reverse-mode differentiation through a cached forward pass.
/// output_grad is dLoss/dOutput, shaped out x batch.
template <typename S>
Gradients<S> backward(const NetParams<S>& params, const ForwardCache<S>& cache,
                      const MatX<NoDeduce<S>>& output_grad) {
  const NetSpec& spec = params.spec();
  if (cache.spec != spec || cache.params_revision != params.revision()) {
    throw DimensionError("backward: cache is stale or from a different net");
  }
  if (output_grad.rows() != spec.output_width() ||
      output_grad.cols() != cache.batch()) {
    throw DimensionError("backward: output_grad shape mismatch");
  }

  Gradients<S> grads;
  grads.flat = VecX<S>::Zero(params.size());
  auto weight_grad = [&](int layer) {
    Index offset = 0;
    for (int l = 0; l < layer; ++l) {
      offset += static_cast<Index>(spec.layer_widths[l] + 1) * spec.layer_widths[l + 1];
    }
    return Eigen::Map<MatX<S>>(grads.flat.data() + offset,
                               spec.layer_widths[layer + 1],
                               spec.layer_widths[layer]);
  };
  auto bias_grad = [&](int layer) {
    Index offset = 0;
    for (int l = 0; l < layer; ++l) {
      offset += static_cast<Index>(spec.layer_widths[l] + 1) * spec.layer_widths[l + 1];
    }
    offset += static_cast<Index>(spec.layer_widths[layer]) * spec.layer_widths[layer + 1];
    return Eigen::Map<VecX<S>>(grads.flat.data() + offset,
                               spec.layer_widths[layer + 1]);
  };

  const int last = spec.num_layers() - 1;
  MatX<S> delta;  // dLoss/dPre for the current layer
  if (spec.output_activation == OutputActivation::kTanh) {
    delta = output_grad.cwiseProduct(
        (MatX<S>::Ones(output_grad.rows(), output_grad.cols()) -
         cache.activation[last].cwiseProduct(cache.activation[last])));
  } else {
    delta = output_grad;
  }

  for (int l = last; l >= 0; --l) {
    const MatX<S>& layer_in = (l == 0) ? cache.input : cache.activation[l - 1];
    weight_grad(l).noalias() = delta * layer_in.transpose();
    bias_grad(l) = delta.rowwise().sum();
    if (l > 0) {
      MatX<S> upstream;
      upstream.noalias() = params.weight(l).transpose() * delta;
      delta = upstream.cwiseProduct(detail::hidden_grad<S>(
          spec.hidden_activation, cache.pre[l - 1], cache.activation[l - 1]));
    } else {
      grads.input.noalias() = params.weight(0).transpose() * delta;
    }
  }
  return grads;
}

inline std::string to_string(Activation a) {
  return a == Activation::kRelu ? "relu" : "elu";
}
inline std::string to_string(OutputActivation a) {
  return a == OutputActivation::kIdentity ? "identity" : "tanh";
}

}  // namespace skillab

#endif  // SKILLAB_MLP_HPP_
