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

#include "skillab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "skillab/run_io.hpp"

namespace skillab {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kMargin = 48.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string svg_open() {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
         "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " +
         num(kHeight) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string hsl_color(double hue01) {
  // Saturated medium-lightness wheel; hue in turns.
  const int h = static_cast<int>(std::fmod(std::max(0.0, hue01), 1.0) * 360.0);
  char buf[48];
  std::snprintf(buf, sizeof(buf), "hsl(%d,70%%,45%%)", h);
  return buf;
}

}  // namespace

void write_histogram_svg(const std::string& path,
                         const std::vector<double>& bin_edges,
                         const std::vector<HistogramSeries>& series,
                         const std::string& x_label) {
  if (bin_edges.size() < 2) return;
  const std::size_t bins = bin_edges.size() - 1;
  double max_density = 1e-12;
  for (const auto& s : series) {
    for (double d : s.density) max_density = std::max(max_density, d);
  }

  const double plot_w = kWidth - 2 * kMargin;
  const double plot_h = kHeight - 2 * kMargin;
  const double x0 = bin_edges.front();
  const double x1 = bin_edges.back();

  std::string out = svg_open();
  out += "<g stroke=\"black\" stroke-width=\"1\">";
  out += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kHeight - kMargin) +
         "\" x2=\"" + num(kWidth - kMargin) + "\" y2=\"" + num(kHeight - kMargin) + "\"/>";
  out += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kMargin) + "\" x2=\"" +
         num(kMargin) + "\" y2=\"" + num(kHeight - kMargin) + "\"/></g>\n";

  const double group = plot_w / static_cast<double>(bins);
  const double bar = group / std::max<std::size_t>(1, series.size());
  for (std::size_t s = 0; s < series.size(); ++s) {
    for (std::size_t b = 0; b < bins && b < series[s].density.size(); ++b) {
      const double h = plot_h * series[s].density[b] / max_density;
      if (h <= 0) continue;
      const double x = kMargin + group * static_cast<double>(b) + bar * static_cast<double>(s);
      const double y = kHeight - kMargin - h;
      out += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" +
             num(std::max(1.0, bar - 1.0)) + "\" height=\"" + num(h) + "\" fill=\"" +
             series[s].color + "\" fill-opacity=\"0.85\"/>\n";
    }
    out += "<text x=\"" + num(kWidth - kMargin - 140.0) + "\" y=\"" +
           num(kMargin + 18.0 * static_cast<double>(s)) + "\" fill=\"" + series[s].color +
           "\" font-size=\"13\">" + series[s].name + "</text>\n";
  }
  out += "<text x=\"" + num(kWidth / 2 - 40.0) + "\" y=\"" + num(kHeight - 10.0) +
         "\" font-size=\"13\">" + x_label + " [" + num(x0) + ", " + num(x1) + "]</text>\n";
  out += "</svg>\n";
  write_text_file(path, out);
}

void write_coverage_svg(const std::string& path,
                        const std::vector<std::pair<long, long>>& cells,
                        double cell_size) {
  long min_x = 0, max_x = 0, min_y = 0, max_y = 0;
  for (const auto& [cx, cy] : cells) {
    min_x = std::min(min_x, cx);
    max_x = std::max(max_x, cx);
    min_y = std::min(min_y, cy);
    max_y = std::max(max_y, cy);
  }
  const double span_x = static_cast<double>(max_x - min_x + 1);
  const double span_y = static_cast<double>(max_y - min_y + 1);
  const double scale = std::min((kWidth - 2 * kMargin) / span_x,
                                (kHeight - 2 * kMargin) / span_y);

  std::string out = svg_open();
  for (const auto& [cx, cy] : cells) {
    const double x = kMargin + (static_cast<double>(cx - min_x)) * scale;
    const double y = kHeight - kMargin - (static_cast<double>(cy - min_y) + 1.0) * scale;
    out += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(scale) +
           "\" height=\"" + num(scale) + "\" fill=\"#2a7d2a\" fill-opacity=\"0.8\"/>\n";
  }
  out += "<text x=\"" + num(kMargin) + "\" y=\"" + num(kHeight - 12.0) +
         "\" font-size=\"13\">cell size " + num(cell_size) + " m, occupied " +
         std::to_string(cells.size()) + "</text>\n";
  out += "</svg>\n";
  write_text_file(path, out);
}

void write_trajectories_svg(const std::string& path,
                            const std::vector<TrajectoryLine>& lines) {
  double min_x = std::numeric_limits<double>::max(), max_x = -min_x;
  double min_y = min_x, max_y = -min_x;
  for (const auto& line : lines) {
    for (double v : line.x) { min_x = std::min(min_x, v); max_x = std::max(max_x, v); }
    for (double v : line.y) { min_y = std::min(min_y, v); max_y = std::max(max_y, v); }
  }
  if (lines.empty() || min_x > max_x) { min_x = -1; max_x = 1; min_y = -1; max_y = 1; }
  const double pad = 0.05 * std::max(max_x - min_x, max_y - min_y) + 1e-9;
  min_x -= pad; max_x += pad; min_y -= pad; max_y += pad;
  const double scale = std::min((kWidth - 2 * kMargin) / (max_x - min_x),
                                (kHeight - 2 * kMargin) / (max_y - min_y));

  auto px = [&](double x) { return kMargin + (x - min_x) * scale; };
  auto py = [&](double y) { return kHeight - kMargin - (y - min_y) * scale; };

  std::string out = svg_open();
  for (const auto& line : lines) {
    if (line.x.size() < 2) continue;
    out += "<polyline fill=\"none\" stroke=\"" + hsl_color(line.hue) +
           "\" stroke-width=\"1\" stroke-opacity=\"0.7\" points=\"";
    for (std::size_t i = 0; i < line.x.size(); ++i) {
      if (i) out += " ";
      out += num(px(line.x[i])) + "," + num(py(line.y[i]));
    }
    out += "\"/>\n";
  }
  // origin marker
  out += "<circle cx=\"" + num(px(0)) + "\" cy=\"" + num(py(0)) +
         "\" r=\"3\" fill=\"black\"/>\n";
  out += "</svg>\n";
  write_text_file(path, out);
}

}  // namespace skillab
