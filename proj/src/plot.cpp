#include "layerscope/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "layerscope/fsio.hpp"

namespace layerscope {

namespace {

constexpr double kWidth = 900.0, kHeight = 420.0;
constexpr double kLeft = 70.0, kRight = 170.0, kTop = 40.0, kBottom = 50.0;
constexpr Index kMaxPoints = 4000;
constexpr const char* kPalette[] = {"#1f77b4", "#2ca02c", "#d95f02", "#7f7f7f", "#9467bd", "#e7298a", "#17becf"};

std::vector<Series<double>> equalized(const std::vector<PlotSeries>& series) {
  Index longest = 0;
  for (const auto& s : series) longest = std::max(longest, s.values.size());
  std::vector<Series<double>> out;
  for (const auto& s : series) {
    require(s.values.size() >= 1, ErrorCode::Validation, "plot: series '" + s.name + "' is empty");
    if (s.values.size() == longest)
      out.push_back(s.values);
    else if (s.values.size() == 1)
      out.push_back(Series<double>::Constant(longest, s.values[0]));
    else
      out.push_back(linear_resample(s.values, longest));
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

Table plot_table(const std::vector<PlotSeries>& series) {
  require(!series.empty(), ErrorCode::Validation, "plot: no series");
  const auto cols = equalized(series);
  Table t;
  t.columns.push_back("index");
  for (const auto& s : series) t.columns.push_back(s.name);
  const Index n = cols.front().size();
  t.data.resize(n, static_cast<Index>(cols.size()) + 1);
  for (Index i = 0; i < n; ++i) t.data(i, 0) = static_cast<double>(i);
  for (std::size_t c = 0; c < cols.size(); ++c) t.data.col(static_cast<Index>(c) + 1) = cols[c];
  return t;
}

std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title) {
  require(!series.empty(), ErrorCode::Validation, "plot: no series");
  auto cols = equalized(series);
  for (std::size_t c = 0; c < cols.size(); ++c) cols[c] *= series[c].scale_hint;
  const Index n = cols.front().size();

  double lo = cols.front().minCoeff(), hi = cols.front().maxCoeff();
  for (const auto& c : cols) {
    lo = std::min(lo, c.minCoeff());
    hi = std::max(hi, c.maxCoeff());
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  auto px = [&](double i) { return kLeft + (n > 1 ? i / static_cast<double>(n - 1) : 0.5) * plot_w; };
  auto py = [&](double v) { return kTop + (1.0 - (v - lo) / (hi - lo)) * plot_h; };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" +
                    fmt(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty())
    svg += "<text x=\"" + fmt(kLeft) + "\" y=\"24\" font-size=\"14\">" + escape(title) + "</text>\n";
  svg += "<g stroke=\"black\"><line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop + plot_h) + "\" x2=\"" +
         fmt(kLeft + plot_w) + "\" y2=\"" + fmt(kTop + plot_h) + "\"/><line x1=\"" + fmt(kLeft) + "\" y1=\"" +
         fmt(kTop) + "\" x2=\"" + fmt(kLeft) + "\" y2=\"" + fmt(kTop + plot_h) + "\"/></g>\n";

  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double frac = static_cast<double>(i) / kTicks;
    const double xi = frac * static_cast<double>(std::max<Index>(n - 1, 0));
    const double x = px(xi);
    svg += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(kTop + plot_h) + "\" x2=\"" + fmt(x) + "\" y2=\"" +
           fmt(kTop + plot_h + 5) + "\" stroke=\"black\"/>";
    svg += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(kTop + plot_h + 20) + "\" text-anchor=\"middle\">" + fmt(xi) +
           "</text>\n";
    const double v = lo + frac * (hi - lo);
    const double y = py(v);
    svg += "<line x1=\"" + fmt(kLeft - 5) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(kLeft) + "\" y2=\"" + fmt(y) +
           "\" stroke=\"black\"/>";
    svg += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(y + 4) + "\" text-anchor=\"end\">" + fmt(v) + "</text>\n";
  }

  const Index stride = std::max<Index>(1, (n + kMaxPoints - 1) / kMaxPoints);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const char* colour = kPalette[c % std::size(kPalette)];
    std::string points;
    for (Index i = 0; i < n; i += stride) {
      if (!points.empty()) points += ' ';
      points += fmt(px(static_cast<double>(i))) + "," + fmt(py(cols[c][i]));
    }
    if ((n - 1) % stride != 0) points += " " + fmt(px(static_cast<double>(n - 1))) + "," + fmt(py(cols[c][n - 1]));
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"1.2\" points=\"" + points +
           "\"/>\n";
    const double ly = kTop + 16.0 * static_cast<double>(c);
    const double lx = kLeft + plot_w + 15.0;
    svg += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(ly) + "\" x2=\"" + fmt(lx + 20) + "\" y2=\"" + fmt(ly) +
           "\" stroke=\"" + colour + "\" stroke-width=\"2\"/>";
    std::string label = series[c].name;
    if (series[c].scale_hint != 1.0) label += " (x" + fmt(series[c].scale_hint) + ")";
    svg += "<text x=\"" + fmt(lx + 26) + "\" y=\"" + fmt(ly + 4) + "\">" + escape(label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void emit_plot(const std::vector<PlotSeries>& series, const std::filesystem::path& stem, const std::string& title) {
  std::filesystem::path csv = stem, svg = stem;
  csv += ".csv";
  svg += ".svg";
  write_csv(plot_table(series), csv);
  write_file_atomic(svg, render_svg(series, title));
}

}  // namespace layerscope
