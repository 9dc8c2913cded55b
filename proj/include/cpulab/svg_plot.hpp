// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "cpulab/analysis.hpp"

namespace cpulab {

struct PlotSeries {
  std::string label;
  std::vector<Point> points;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

/// Standalone SVG scatter/line chart. The plotted values are repeated in an
/// XML comment ("data series=...") so the figure can be regenerated from the
/// file alone. Output depends only on the spec.
std::string render_svg(const PlotSpec& spec);

}  // namespace cpulab
