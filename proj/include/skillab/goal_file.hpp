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

#ifndef SKILLAB_GOAL_FILE_HPP_
#define SKILLAB_GOAL_FILE_HPP_

#include <optional>
#include <string>
#include <vector>

#include "skillab/types.hpp"

namespace skillab {

/// One parsed goal row: target position and optional target heading.
struct GoalRow {
  double x = 0;
  double y = 0;
  std::optional<double> heading;
};

/// Parses a goal list: one goal per line, "x y" or "x y heading",
/// whitespace-separated, '#' starts a comment. Malformed rows raise
/// ConfigError naming the line number.
std::vector<GoalRow> parse_goal_file(const std::string& text);

}  // namespace skillab

#endif  // SKILLAB_GOAL_FILE_HPP_
