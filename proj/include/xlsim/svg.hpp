// SPDX-License-Identifier: Apache-2.0
//
// xlsim - grant-free access and localization simulator for subarray-based
// extra-large-scale MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace xlsim {

// Minimal self-contained SVG line plots for study outputs. Not a general
// plotting tool: fixed canvas, at most a handful of series, finite data
// points only (non-finite values are dropped per point).
struct PlotSeries {
  std::string name;
  std::vector<double> x, y;
  bool step = false; // draw as a staircase (for CDFs)
};

namespace detail {

inline std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline const char *series_color(std::size_t i) {
  static const char *palette[] = {"#1f6fb2", "#d1495b", "#3e885b", "#8d6b94",
                                  "#c28e0e", "#4f5d75", "#7a9e7e", "#b36a5e"};
  return palette[i % (sizeof palette / sizeof palette[0])];
}

inline void nice_ticks(double lo, double hi, int target, std::vector<double> &ticks) {
  ticks.clear();
  if (!(hi > lo)) {
    ticks.push_back(lo);
    return;
  }
  const double raw = (hi - lo) / std::max(target, 2);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  const double first = std::ceil(lo / step) * step;
  for (double t = first; t <= hi + 0.5 * step; t += step) ticks.push_back(t);
}

} // namespace detail

inline std::string svg_line_chart(const std::string &title, const std::string &xlabel,
                                  const std::string &ylabel,
                                  const std::vector<PlotSeries> &series) {
  const double width = 680, height = 440;
  const double ml = 72, mr = 24, mt = 40, mb = 56;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto &s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  if (!std::isfinite(xlo)) {
    xlo = 0, xhi = 1, ylo = 0, yhi = 1;
  }
  if (xhi <= xlo) xhi = xlo + 1;
  if (yhi <= ylo) yhi = ylo + 1;
  const double ypad = 0.06 * (yhi - ylo);
  ylo -= ypad;
  yhi += ypad;

  auto sx = [&](double v) { return ml + (v - xlo) / (xhi - xlo) * pw; };
  auto sy = [&](double v) { return mt + ph - (v - ylo) / (yhi - ylo) * ph; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fmt_num(width) +
         "\" height=\"" + detail::fmt_num(height) + "\" viewBox=\"0 0 " +
         detail::fmt_num(width) + " " + detail::fmt_num(height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + detail::fmt_num(width / 2) + "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\" font-weight=\"bold\">" + title + "</text>\n";

  std::vector<double> xticks, yticks;
  detail::nice_ticks(xlo, xhi, 6, xticks);
  detail::nice_ticks(ylo, yhi, 6, yticks);
  for (double t : xticks) {
    out += "<line x1=\"" + detail::fmt_num(sx(t)) + "\" y1=\"" + detail::fmt_num(mt) +
           "\" x2=\"" + detail::fmt_num(sx(t)) + "\" y2=\"" + detail::fmt_num(mt + ph) +
           "\" stroke=\"#dddddd\"/>\n";
    out += "<text x=\"" + detail::fmt_num(sx(t)) + "\" y=\"" + detail::fmt_num(mt + ph + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           detail::fmt_num(t) + "</text>\n";
  }
  for (double t : yticks) {
    out += "<line x1=\"" + detail::fmt_num(ml) + "\" y1=\"" + detail::fmt_num(sy(t)) +
           "\" x2=\"" + detail::fmt_num(ml + pw) + "\" y2=\"" + detail::fmt_num(sy(t)) +
           "\" stroke=\"#dddddd\"/>\n";
    out += "<text x=\"" + detail::fmt_num(ml - 6) + "\" y=\"" + detail::fmt_num(sy(t) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           detail::fmt_num(t) + "</text>\n";
  }
  out += "<rect x=\"" + detail::fmt_num(ml) + "\" y=\"" + detail::fmt_num(mt) + "\" width=\"" +
         detail::fmt_num(pw) + "\" height=\"" + detail::fmt_num(ph) +
         "\" fill=\"none\" stroke=\"#333333\"/>\n";
  out += "<text x=\"" + detail::fmt_num(ml + pw / 2) + "\" y=\"" + detail::fmt_num(height - 14) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + xlabel +
         "</text>\n";
  out += "<text x=\"18\" y=\"" + detail::fmt_num(mt + ph / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 18 " +
         detail::fmt_num(mt + ph / 2) + ")\">" + ylabel + "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto &s = series[si];
    std::string pts;
    double last_y = 0.0;
    bool have_last = false;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (s.step && have_last)
        pts += detail::fmt_num(sx(s.x[i])) + "," + detail::fmt_num(sy(last_y)) + " ";
      pts += detail::fmt_num(sx(s.x[i])) + "," + detail::fmt_num(sy(s.y[i])) + " ";
      last_y = s.y[i];
      have_last = true;
      if (!s.step)
        out += "<circle cx=\"" + detail::fmt_num(sx(s.x[i])) + "\" cy=\"" +
               detail::fmt_num(sy(s.y[i])) + "\" r=\"3\" fill=\"" +
               detail::series_color(si) + "\"/>\n";
    }
    if (!pts.empty())
      out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" +
             detail::series_color(si) + "\" stroke-width=\"1.8\"/>\n";
    const double ly = mt + 16 + 16 * static_cast<double>(si);
    out += "<line x1=\"" + detail::fmt_num(ml + pw - 150) + "\" y1=\"" + detail::fmt_num(ly - 4) +
           "\" x2=\"" + detail::fmt_num(ml + pw - 126) + "\" y2=\"" + detail::fmt_num(ly - 4) +
           "\" stroke=\"" + detail::series_color(si) + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + detail::fmt_num(ml + pw - 120) + "\" y=\"" + detail::fmt_num(ly) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + s.name + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

} // namespace xlsim
