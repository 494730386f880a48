#pragma once

#include <string>
#include <utility>
#include <vector>

namespace volfeed {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;  // empty = palette by index
  bool dashed = false;
  bool points = false;  // draw markers instead of a line
};

// Self-contained SVG line chart: axes, ticks, legend, optional dashed
// horizontal reference lines. Output is deterministic for identical input
// and embeds the plotted numbers as an XML comment so the figure can be
// checked without a renderer.
struct SvgChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<SvgSeries> series;
  std::vector<std::pair<double, std::string>> hlines;
  int width = 920;
  int height = 560;

  std::string render() const;
  void write(const std::string& path) const;
};

}  // namespace volfeed
