// src/svg_plot.cpp
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

#include "wsner/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace wsner {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#9467bd", "#ff7f0e", "#8c564b"};
constexpr int kPaletteSize = 6;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_line_plot(const PlotSpec& spec) {
  const double ml = 64, mr = 170, mt = 42, mb = 52;
  const double pw = spec.width - ml - mr;
  const double ph = spec.height - mt - mb;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const PlotSeries& s : spec.series)
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (!(xmin <= xmax)) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (xmax - xmin < 1e-12) {
    xmin -= 1;
    xmax += 1;
  }
  if (ymax - ymin < 1e-12) {
    ymin -= 1;
    ymax += 1;
  } else {
    double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
  }

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(spec.width) + "\" height=\"" +
         std::to_string(spec.height) + "\" viewBox=\"0 0 " +
         std::to_string(spec.width) + " " + std::to_string(spec.height) +
         "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(ml + pw / 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\" font-weight=\"bold\">" +
         escape_xml(spec.title) + "</text>\n";

  // Axes box and ticks.
  out += "<rect x=\"" + num(ml) + "\" y=\"" + num(mt) + "\" width=\"" +
         num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"#444444\"/>\n";
  const int kTicks = 5;
  for (int i = 0; i < kTicks; ++i) {
    double fx = xmin + (xmax - xmin) * i / (kTicks - 1);
    double fy = ymin + (ymax - ymin) * i / (kTicks - 1);
    double gx = px(fx), gy = py(fy);
    out += "<line x1=\"" + num(gx) + "\" y1=\"" + num(mt) + "\" x2=\"" +
           num(gx) + "\" y2=\"" + num(mt + ph) +
           "\" stroke=\"#dddddd\"/>\n";
    out += "<line x1=\"" + num(ml) + "\" y1=\"" + num(gy) + "\" x2=\"" +
           num(ml + pw) + "\" y2=\"" + num(gy) +
           "\" stroke=\"#dddddd\"/>\n";
    out += "<text x=\"" + num(gx) + "\" y=\"" + num(mt + ph + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">" +
           tick_label(fx) + "</text>\n";
    out += "<text x=\"" + num(ml - 6) + "\" y=\"" + num(gy + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">" +
           tick_label(fy) + "</text>\n";
  }
  out += "<text x=\"" + num(ml + pw / 2) + "\" y=\"" +
         num(spec.height - 12.0) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">" +
         escape_xml(spec.xlabel) + "</text>\n";
  out += "<text x=\"16\" y=\"" + num(mt + ph / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 16 " + num(mt + ph / 2) +
         ")\">" + escape_xml(spec.ylabel) + "</text>\n";

  // Series.
  for (size_t si = 0; si < spec.series.size(); ++si) {
    const PlotSeries& s = spec.series[si];
    const char* color = kPalette[si % kPaletteSize];
    std::vector<std::pair<double, double>> pts = s.points;
    std::sort(pts.begin(), pts.end());
    std::string poly;
    for (const auto& [x, y] : pts) {
      if (!poly.empty()) poly += " ";
      poly += num(px(x)) + "," + num(py(y));
    }
    if (pts.size() > 1)
      out += "<polyline points=\"" + poly + "\" fill=\"none\" stroke=\"" +
             color + "\" stroke-width=\"2\"/>\n";
    for (const auto& [x, y] : pts)
      out += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) +
             "\" r=\"3\" fill=\"" + std::string(color) + "\"/>\n";
    // Legend entry.
    double ly = mt + 14 + 20.0 * si;
    out += "<line x1=\"" + num(ml + pw + 12) + "\" y1=\"" + num(ly) +
           "\" x2=\"" + num(ml + pw + 34) + "\" y2=\"" + num(ly) +
           "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + num(ml + pw + 40) + "\" y=\"" + num(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" +
           escape_xml(s.label) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace wsner
