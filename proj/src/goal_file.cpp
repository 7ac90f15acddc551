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

#include "skillab/goal_file.hpp"

#include <sstream>

namespace skillab {

std::vector<GoalRow> parse_goal_file(const std::string& text) {
  std::vector<GoalRow> goals;
  std::istringstream in(text);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    std::istringstream row(line);
    std::vector<double> values;
    double v;
    while (row >> v) values.push_back(v);
    std::string rest;
    if (row.fail() && !row.eof()) {
      throw ConfigError("goal file line " + std::to_string(line_number) +
                        ": expected numbers");
    }
    if (values.empty()) continue;
    if (values.size() != 2 && values.size() != 3) {
      throw ConfigError("goal file line " + std::to_string(line_number) +
                        ": expected 'x y' or 'x y heading', got " +
                        std::to_string(values.size()) + " fields");
    }
    GoalRow goal;
    goal.x = values[0];
    goal.y = values[1];
    if (values.size() == 3) goal.heading = values[2];
    goals.push_back(goal);
  }
  return goals;
}

}  // namespace skillab
