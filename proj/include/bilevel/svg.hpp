#pragma once

#include <string>
#include <vector>

namespace bilevel {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

/// Self-contained log-log line plot. Points with a non-positive or non-finite
/// coordinate are skipped.
std::string render_loglog_svg(const std::string& title, const std::string& x_label,
                              const std::vector<PlotSeries>& series);

}  // namespace bilevel
