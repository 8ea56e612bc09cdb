#pragma once

#include <string>
#include <vector>

namespace tracelab::cli {

enum class SeriesStyle { line, markers, bars };

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  SeriesStyle style = SeriesStyle::line;
};

// Single-panel plot rendered to a standalone SVG document.
struct Plot {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;

  std::string render(int width = 720, int height = 460) const;
};

}  // namespace tracelab::cli
