#include "seqrpf/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace seqrpf {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
constexpr int kPaletteSize = 6;

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

struct Axis {
  bool log = false;
  double lo = 0, hi = 1;          // transformed coordinates
  std::vector<double> ticks;      // transformed positions
  std::vector<std::string> labels;

  double transform(double v) const { return log ? std::log10(v) : v; }
  bool admits(double v) const { return std::isfinite(v) && (!log || v > 0); }
};

// tick step of the form {1,2,5} * 10^k giving roughly `target` divisions
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag * (1 + 1e-12)) return m * mag;
  }
  return 10 * mag;
}

Axis build_axis(const std::vector<Series>& series, bool from_x, bool log) {
  Axis ax;
  ax.log = log;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    const auto& v = from_x ? s.x : s.y;
    for (double p : v) {
      if (!ax.admits(p)) continue;
      lo = std::min(lo, ax.transform(p));
      hi = std::max(hi, ax.transform(p));
    }
  }
  if (!(lo <= hi)) {
    lo = log ? 0 : 0;
    hi = log ? 1 : 1;
  }
  if (hi - lo < 1e-12) {
    const double pad = std::max(1.0, std::abs(hi)) * 0.5;
    lo -= pad;
    hi += pad;
  }
  const double pad = (hi - lo) * 0.05;
  ax.lo = lo - pad;
  ax.hi = hi + pad;

  if (log) {
    const int first = static_cast<int>(std::ceil(ax.lo - 1e-9));
    const int last = static_cast<int>(std::floor(ax.hi + 1e-9));
    const int every = std::max(1, (last - first) / 8 + ((last - first) % 8 ? 1 : 0));
    for (int e = first; e <= last; e += every) {
      ax.ticks.push_back(e);
      ax.labels.push_back("1e" + std::to_string(e));
    }
  } else {
    const double step = nice_step(ax.hi - ax.lo, 5);
    for (double t = std::ceil(ax.lo / step) * step; t <= ax.hi + step * 1e-9; t += step) {
      const double v = std::abs(t) < step * 1e-9 ? 0 : t;
      ax.ticks.push_back(v);
      ax.labels.push_back(fmt(v, "%.4g"));
    }
  }
  return ax;
}

}  // namespace

std::string render_plot(const std::vector<Series>& series, const PlotOptions& opts) {
  const int ml = 72, mr = 24, mt = 40, mb = 52;
  const double pw = opts.width - ml - mr;
  const double ph = opts.height - mt - mb;
  const Axis xa = build_axis(series, true, opts.log_x);
  const Axis ya = build_axis(series, false, opts.log_y);

  auto px = [&](double v) { return ml + (xa.transform(v) - xa.lo) / (xa.hi - xa.lo) * pw; };
  auto py = [&](double v) { return mt + ph - (ya.transform(v) - ya.lo) / (ya.hi - ya.lo) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(opts.width) +
         "\" height=\"" + std::to_string(opts.height) + "\" viewBox=\"0 0 " +
         std::to_string(opts.width) + " " + std::to_string(opts.height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(opts.width / 2.0) +
         "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
         escape(opts.title) + "</text>\n";

  for (std::size_t i = 0; i < xa.ticks.size(); ++i) {
    const double gx = ml + (xa.ticks[i] - xa.lo) / (xa.hi - xa.lo) * pw;
    svg += "<line x1=\"" + fmt(gx) + "\" y1=\"" + fmt(double(mt)) + "\" x2=\"" + fmt(gx) +
           "\" y2=\"" + fmt(mt + ph) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + fmt(gx) + "\" y=\"" + fmt(mt + ph + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           xa.labels[i] + "</text>\n";
  }
  for (std::size_t i = 0; i < ya.ticks.size(); ++i) {
    const double gy = mt + ph - (ya.ticks[i] - ya.lo) / (ya.hi - ya.lo) * ph;
    svg += "<line x1=\"" + fmt(double(ml)) + "\" y1=\"" + fmt(gy) + "\" x2=\"" + fmt(ml + pw) +
           "\" y2=\"" + fmt(gy) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + fmt(ml - 6.0) + "\" y=\"" + fmt(gy + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + ya.labels[i] +
           "</text>\n";
  }
  svg += "<rect x=\"" + fmt(double(ml)) + "\" y=\"" + fmt(double(mt)) + "\" width=\"" + fmt(pw) +
         "\" height=\"" + fmt(ph) + "\" fill=\"none\" stroke=\"#333333\"/>\n";
  svg += "<text x=\"" + fmt(ml + pw / 2) + "\" y=\"" + fmt(mt + ph + 40) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
         escape(opts.x_label) + "</text>\n";
  svg += "<text x=\"18\" y=\"" + fmt(mt + ph / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 18 " +
         fmt(mt + ph / 2) + ")\">" + escape(opts.y_label) + "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = kPalette[si % kPaletteSize];
    std::string pts;
    for (std::size_t i = 0; i < series[si].x.size() && i < series[si].y.size(); ++i) {
      const double vx = series[si].x[i], vy = series[si].y[i];
      if (!xa.admits(vx) || !ya.admits(vy)) continue;
      pts += fmt(px(vx), "%.2f");
      pts += ',';
      pts += fmt(py(vy), "%.2f");
      pts += ' ';
      svg += "<circle cx=\"" + fmt(px(vx), "%.2f") + "\" cy=\"" + fmt(py(vy), "%.2f") +
             "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
    }
    if (!pts.empty()) pts.pop_back();
    svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\"/>\n";
    svg += "<text x=\"" + fmt(ml + pw - 8) + "\" y=\"" + fmt(mt + 16 + 16.0 * si) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" + color +
           "\">" + escape(series[si].label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace seqrpf
