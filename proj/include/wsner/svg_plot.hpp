// wsner/svg_plot.hpp
//
// Copyright 2026  The wsner authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABILITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef WSNER_SVG_PLOT_HPP_
#define WSNER_SVG_PLOT_HPP_

#include <string>
#include <utility>
#include <vector>

namespace wsner {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y)
};

struct PlotSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  std::vector<PlotSeries> series;
  int width = 720;
  int height = 440;
};

// Static line chart as standalone SVG text. Deterministic: identical specs
// render identical bytes (no timestamps or generated ids).
std::string render_line_plot(const PlotSpec& spec);

}  // namespace wsner

#endif  // WSNER_SVG_PLOT_HPP_
