#pragma once

#include <string>
#include <vector>

namespace treatchoice {

/// One plotted series. Line styles are fixed project-wide: solid for
/// shrinkage, dotted for the sign rule, dashed for pooling; POINTS draws
/// markers without a connecting line.
struct Series {
  enum class Style { SOLID, DOTTED, DASHED, POINTS };
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  Style style = Style::SOLID;
  std::string color = "#1a1a1a";
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<double> h_lines;  ///< horizontal reference levels (e.g. zero)
  int width = 720;
  int height = 480;
};

/// Render a self-contained static SVG document. Output is deterministic:
/// same chart, same bytes.
std::string render_svg(const Chart& chart);

void write_svg(const std::string& path, const Chart& chart);

}  // namespace treatchoice
