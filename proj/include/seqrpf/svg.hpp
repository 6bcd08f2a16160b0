#pragma once

#include <string>
#include <vector>

namespace seqrpf {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 760;
  int height = 500;
};

// self-contained polyline chart; points that cannot live on the chosen axes
// (non-finite, or non-positive on a log scale) are dropped
std::string render_plot(const std::vector<Series>& series, const PlotOptions& opts);

}  // namespace seqrpf
