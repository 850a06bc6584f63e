#include "treatchoice/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "treatchoice/errors.hpp"

namespace treatchoice {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Extent {
  double lo = 0.0, hi = 1.0;

  void widen(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (hi <= lo) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

// Round tick spacing to a 1/2/5 ladder so labels stay readable.
double tick_step(double range) {
  const double raw = range / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  if (norm <= 2.0) return 2.0 * mag;
  if (norm <= 5.0) return 5.0 * mag;
  return 10.0 * mag;
}

const char* dash_for(Series::Style style) {
  switch (style) {
    case Series::Style::SOLID: return "";
    case Series::Style::DOTTED: return " stroke-dasharray=\"2,4\"";
    case Series::Style::DASHED: return " stroke-dasharray=\"8,5\"";
    case Series::Style::POINTS: return "";
  }
  return "";
}

}  // namespace

std::string render_svg(const Chart& chart) {
  const double ml = 62, mr = 18, mt = chart.title.empty() ? 18 : 40, mb = 48;
  const double pw = chart.width - ml - mr;
  const double ph = chart.height - mt - mb;

  Extent xe, ye;
  bool any = false;
  for (const auto& s : chart.series) {
    if (s.x.size() != s.y.size())
      throw config_error("svg: series '" + s.name + "' has mismatched x/y lengths");
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!any) {
        xe.lo = xe.hi = s.x[i];
        ye.lo = ye.hi = s.y[i];
        any = true;
      }
      xe.widen(s.x[i]);
      ye.widen(s.y[i]);
    }
  }
  for (double h : chart.h_lines) ye.widen(h);
  xe.finish();
  ye.finish();

  auto px = [&](double x) { return ml + (x - xe.lo) / (xe.hi - xe.lo) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ye.lo) / (ye.hi - ye.lo) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << chart.width
      << "\" height=\"" << chart.height << "\" viewBox=\"0 0 " << chart.width << " "
      << chart.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!chart.title.empty())
    out << "<text x=\"" << chart.width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << escape(chart.title)
        << "</text>\n";

  // Axes box and ticks.
  out << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\"" << fmt(pw)
      << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  const double xstep = tick_step(xe.hi - xe.lo);
  for (double t = std::ceil(xe.lo / xstep) * xstep; t <= xe.hi + 1e-12 * xstep; t += xstep) {
    const double x = px(t);
    out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\"" << fmt(x)
        << "\" y2=\"" << fmt(mt + ph + 5) << "\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(mt + ph + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt(t == 0.0 ? 0.0 : t) << "</text>\n";
  }
  const double ystep = tick_step(ye.hi - ye.lo);
  for (double t = std::ceil(ye.lo / ystep) * ystep; t <= ye.hi + 1e-12 * ystep; t += ystep) {
    const double y = py(t);
    out << "<line x1=\"" << fmt(ml - 5) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(ml)
        << "\" y2=\"" << fmt(y) << "\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << fmt(ml - 8) << "\" y=\"" << fmt(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt(t == 0.0 ? 0.0 : t) << "</text>\n";
  }
  if (!chart.x_label.empty())
    out << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(mt + ph + 36)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape(chart.x_label) << "</text>\n";
  if (!chart.y_label.empty())
    out << "<text x=\"14\" y=\"" << fmt(mt + ph / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 14 " << fmt(mt + ph / 2) << ")\">"
        << escape(chart.y_label) << "</text>\n";

  for (double h : chart.h_lines)
    out << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(py(h)) << "\" x2=\"" << fmt(ml + pw)
        << "\" y2=\"" << fmt(py(h)) << "\" stroke=\"#999\" stroke-width=\"0.8\"/>\n";

  for (const auto& s : chart.series) {
    if (s.style == Series::Style::POINTS) {
      for (size_t i = 0; i < s.x.size(); ++i)
        out << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\"" << fmt(py(s.y[i]))
            << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
      continue;
    }
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.6\""
        << dash_for(s.style) << " points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (i) out << ' ';
      out << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i]));
    }
    out << "\"/>\n";
  }

  // Legend, top-right inside the plot area.
  double ly = mt + 14;
  for (const auto& s : chart.series) {
    if (s.name.empty()) continue;
    const double lx = ml + pw - 150;
    if (s.style == Series::Style::POINTS) {
      out << "<circle cx=\"" << fmt(lx + 14) << "\" cy=\"" << fmt(ly - 4) << "\" r=\"3\" fill=\""
          << s.color << "\"/>\n";
    } else {
      out << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\"" << fmt(lx + 28)
          << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << s.color << "\" stroke-width=\"1.6\""
          << dash_for(s.style) << "/>\n";
    }
    out << "<text x=\"" << fmt(lx + 34) << "\" y=\"" << fmt(ly)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(s.name) << "</text>\n";
    ly += 16;
  }

  out << "</svg>\n";
  return out.str();
}

void write_svg(const std::string& path, const Chart& chart) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("svg: cannot write '" + path + "'");
  out << render_svg(chart);
}

}  // namespace treatchoice
