#pragma once

#include <string>
#include <vector>

namespace freeclt::cli {

struct Curve {
  std::string label;
  std::vector<double> y;
  bool dashed = false;
};

/// 800x600 SVG 1.1 line plot of the curves over xs, with axes and a legend.
std::string render_plot(const std::vector<double>& xs, const std::vector<Curve>& curves, const std::string& title);

}  // namespace freeclt::cli
