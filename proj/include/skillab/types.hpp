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

#ifndef SKILLAB_TYPES_HPP_
#define SKILLAB_TYPES_HPP_

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <type_traits>

namespace skillab {

using Index = Eigen::Index;

// Blocks template deduction on data arguments so Eigen expressions convert
// to plain matrices at the call site (the scalar is deduced elsewhere).
template <typename S>
using NoDeduce = typename std::type_identity<S>::type;

template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S>
using Vec2 = Eigen::Matrix<S, 2, 1>;
template <typename S>
using ArrX = Eigen::Array<S, Eigen::Dynamic, 1>;

using BoolArray = Eigen::Array<bool, Eigen::Dynamic, 1>;
using IntVec = Eigen::VectorXi;

// Invalid or inconsistent user configuration. Maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or layout mismatch between caller data and a contract.
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values where finite math is required. Maps to exit code 3.
struct NumericFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem / serialization failure. Maps to exit code 4.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace skillab

#endif  // SKILLAB_TYPES_HPP_
