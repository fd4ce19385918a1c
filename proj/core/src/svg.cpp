#include "alignlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "alignlab/error.hpp"

namespace alignlab {

namespace {

std::string xml_escape(const std::string& s) {
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

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

AxisRange finish(double lo, double hi, bool log) {
  if (lo > hi) return log ? AxisRange{1.0, 10.0} : AxisRange{0.0, 1.0};
  if (log) {
    return {std::pow(10.0, std::floor(std::log10(lo))), std::pow(10.0, std::ceil(std::log10(hi)))};
  }
  if (hi == lo) {
    const double pad = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
    return {lo - pad, hi + pad};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

std::vector<double> ticks(const AxisRange& r, bool log) {
  std::vector<double> t;
  if (log) {
    const int a = static_cast<int>(std::round(std::log10(r.lo)));
    const int b = static_cast<int>(std::round(std::log10(r.hi)));
    const int step = std::max(1, (b - a) / 6);
    for (int k = a; k <= b; k += step) t.push_back(std::pow(10.0, k));
    return t;
  }
  const double raw = (r.hi - r.lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  for (double v = std::ceil(r.lo / step) * step; v <= r.hi + 1e-9 * step; v += step)
    t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return t;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::pair<AxisRange, AxisRange> plot_ranges(const LinePlot& plot) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : plot.series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], plot.log_x) || !usable(s.y[i], plot.log_y)) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  return {finish(x0, x1, plot.log_x), finish(y0, y1, plot.log_y)};
}

std::string render_svg(const LinePlot& plot, int width, int height) {
  const auto [xr, yr] = plot_ranges(plot);
  const double left = 80, right = 150, top = 40, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;
  auto tx = [&](double v) {
    const double f = plot.log_x ? (std::log10(v) - std::log10(xr.lo)) / (std::log10(xr.hi) - std::log10(xr.lo))
                                : (v - xr.lo) / (xr.hi - xr.lo);
    return left + f * pw;
  };
  auto ty = [&](double v) {
    const double f = plot.log_y ? (std::log10(v) - std::log10(yr.lo)) / (std::log10(yr.hi) - std::log10(yr.lo))
                                : (v - yr.lo) / (yr.hi - yr.lo);
    return top + (1.0 - f) * ph;
  };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
    << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
    << "<text x=\"" << num(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
    << xml_escape(plot.title) << "</text>\n"
    << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\""
    << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  o << "<g font-family=\"sans-serif\" font-size=\"11\" stroke=\"#ddd\">\n";
  for (double t : ticks(xr, plot.log_x)) {
    const double X = tx(t);
    o << "<line x1=\"" << num(X) << "\" y1=\"" << num(top) << "\" x2=\"" << num(X) << "\" y2=\""
      << num(top + ph) << "\"/><text x=\"" << num(X) << "\" y=\"" << num(top + ph + 16)
      << "\" text-anchor=\"middle\" stroke=\"none\">" << tick_label(t) << "</text>\n";
  }
  for (double t : ticks(yr, plot.log_y)) {
    const double Y = ty(t);
    o << "<line x1=\"" << num(left) << "\" y1=\"" << num(Y) << "\" x2=\"" << num(left + pw) << "\" y2=\""
      << num(Y) << "\"/><text x=\"" << num(left - 6) << "\" y=\"" << num(Y + 4)
      << "\" text-anchor=\"end\" stroke=\"none\">" << tick_label(t) << "</text>\n";
  }
  o << "</g>\n";
  o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 18)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xml_escape(plot.xlabel)
    << (plot.log_x ? " (log)" : "") << "</text>\n"
    << "<text x=\"18\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
    << "font-size=\"13\" transform=\"rotate(-90 18 " << num(top + ph / 2) << ")\">" << xml_escape(plot.ylabel)
    << (plot.log_y ? " (log)" : "") << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kColors[k % std::size(kColors)];
    std::ostringstream pts;
    std::vector<std::pair<double, double>> drawn;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], plot.log_x) || !usable(s.y[i], plot.log_y)) continue;
      drawn.emplace_back(tx(s.x[i]), ty(s.y[i]));
    }
    for (const auto& [X, Y] : drawn) pts << num(X) << ',' << num(Y) << ' ';
    if (drawn.size() > 1)
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
    if (s.markers)
      for (const auto& [X, Y] : drawn)
        o << "<circle cx=\"" << num(X) << "\" cy=\"" << num(Y) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    const double ly = top + 14 + 18 * static_cast<double>(k);
    o << "<line x1=\"" << num(left + pw + 10) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(left + pw + 30)
      << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>"
      << "<text x=\"" << num(left + pw + 35) << "\" y=\"" << num(ly + 4)
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_svg(const std::filesystem::path& path, const LinePlot& plot) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << render_svg(plot);
  if (!out) throw IoError("write failed on " + path.string());
}

}  // namespace alignlab
