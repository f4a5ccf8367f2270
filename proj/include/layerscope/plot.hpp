#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "layerscope/csv.hpp"

namespace layerscope {

struct PlotSeries {
  std::string name;
  Series<double> values;
  double scale_hint = 1.0;  // applied to the SVG overlay only
};

/// Series of unequal length are linearly resampled to the longest one.
Table plot_table(const std::vector<PlotSeries>& series);
std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title = {});

/// Writes `<stem>.csv` (unscaled values) and `<stem>.svg` (one polyline per
/// series, scaled by scale_hint, with axis ticks and a legend).
void emit_plot(const std::vector<PlotSeries>& series, const std::filesystem::path& stem,
               const std::string& title = {});

}  // namespace layerscope
