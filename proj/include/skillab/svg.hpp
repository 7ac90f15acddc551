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

#ifndef SKILLAB_SVG_HPP_
#define SKILLAB_SVG_HPP_

#include <string>
#include <utility>
#include <vector>

namespace skillab {

/// One named density series over shared bin edges.
struct HistogramSeries {
  std::string name;
  std::string color;  // CSS color
  std::vector<double> density;
};

void write_histogram_svg(const std::string& path,
                         const std::vector<double>& bin_edges,
                         const std::vector<HistogramSeries>& series,
                         const std::string& x_label);

/// Occupied grid cells as (cell_x, cell_y) indices.
void write_coverage_svg(const std::string& path,
                        const std::vector<std::pair<long, long>>& cells,
                        double cell_size);

/// XY polylines, one per trajectory, with a per-trajectory hue in [0, 1)
/// (used to color by skill direction).
struct TrajectoryLine {
  std::vector<double> x;
  std::vector<double> y;
  double hue = 0.0;
};

void write_trajectories_svg(const std::string& path,
                            const std::vector<TrajectoryLine>& lines);

}  // namespace skillab

#endif  // SKILLAB_SVG_HPP_
